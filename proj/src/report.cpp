#include "worm/report.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

namespace worm::report {

using nlohmann::json;

namespace {

json box_json(const spectral::Box& b) {
  return {{"re_min", b.re_min}, {"re_max", b.re_max}, {"im_min", b.im_min}, {"im_max", b.im_max}};
}

json kv_json(const estimates::KeyValues& kv) {
  json j = json::object();
  for (const auto& [k, v] : kv) j[k] = v;
  return j;
}

json certificate_value(const spectral::ZeroCertificate& z) {
  json zeros = json::array();
  for (const auto& r : z.zeros)
    zeros.push_back({{"re", r.zeta.real()},
                     {"im", r.zeta.imag()},
                     {"residual", r.residual},
                     {"scale", r.scale},
                     {"iterations", r.iterations},
                     {"multiplicity", r.multiplicity},
                     {"method", r.method}});
  return {{"box", box_json(z.box)},
          {"winding", z.winding},
          {"zero_count", z.zero_count()},
          {"consistent", z.winding == z.zero_count()},
          {"multiplicity_flag", z.multiplicity_flag},
          {"leaf_boxes", z.leaf_boxes},
          {"zeros", zeros}};
}

}  // namespace

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  const auto tmp = std::filesystem::path(p.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, p);
}

std::string scan_csv(const geometry::ScanReport& r) {
  std::string out = "x,t,mu,nu\n";
  for (const auto& s : r.samples) out += fmt::format("{},{},{},{}\n", num(s.x), num(s.t), num(s.mu), num(s.nu));
  return out;
}

std::string certificate_json(const spectral::ZeroCertificate& z, double tol, const std::string& hash) {
  json j = certificate_value(z);
  j["tol"] = tol;
  j["config_hash"] = hash;
  return j.dump(2) + "\n";
}

std::string zeros_csv(const spectral::ZeroCertificate& z) {
  std::string out = "k,re,im,residual,scale,multiplicity,method\n";
  int k = 0;
  for (const auto& r : z.zeros)
    out += fmt::format("{},{},{},{},{},{},{}\n", k++, num(r.zeta.real()), num(r.zeta.imag()), num(r.residual),
                       num(r.scale), r.multiplicity, r.method);
  return out;
}

std::string exceptional_csv(const spectral::ExceptionalExponents& e) {
  const auto& b = e.strip;
  std::string out = fmt::format("# strip re_zeta in [{}, {}], im_zeta in [{}, {}], s in [{}, {}]\n", num(b.re_min),
                                num(b.re_max), num(b.im_min), num(b.im_max), num(e.s_min), num(e.s_max));
  out += "s,re_zeta,im_zeta,residual\n";
  for (const auto& x : e.entries)
    out += fmt::format("{},{},{},{}\n", num(x.s), num(x.zeta.real()), num(x.zeta.imag()), num(x.residual));
  return out;
}

std::string exceptional_json(const spectral::ExceptionalExponents& e, double tol, const std::string& hash) {
  json entries = json::array();
  for (const auto& x : e.entries)
    entries.push_back({{"s", x.s}, {"re_zeta", x.zeta.real()}, {"im_zeta", x.zeta.imag()}, {"residual", x.residual}});
  json j = {{"s_min", e.s_min},
            {"s_max", e.s_max},
            {"gamma_max", e.gamma_max},
            {"strip", box_json(e.strip)},
            {"entries", entries},
            {"certificate", certificate_value(e.certificate)},
            {"tol", tol},
            {"config_hash", hash}};
  return j.dump(2) + "\n";
}

std::string record_json(const estimates::EstimateRecord& r, const std::string& hash) {
  json j = {{"id", r.id},         {"params", kv_json(r.params)}, {"lhs", r.lhs},
            {"rhs", r.rhs},       {"ratio", r.ratio},            {"family", r.family},
            {"flag", r.flag},     {"extra", kv_json(r.extra)},   {"config_hash", hash}};
  return j.dump();
}

std::string report_ndjson(const estimates::EstimateReport& r, const std::string& hash) {
  std::string out;
  for (const auto& rec : r.records) out += record_json(rec, hash) + "\n";
  return out;
}

std::string plot_csv(const estimates::EstimateReport& r, const std::string& param_key) {
  std::string out = fmt::format("{},ratio,lhs,rhs,flag\n", param_key);
  for (const auto& rec : r.records)
    out += fmt::format("{},{},{},{},{}\n", num(rec.param(param_key)), num(rec.ratio), num(rec.lhs), num(rec.rhs),
                       rec.flag);
  return out;
}

}  // namespace worm::report
