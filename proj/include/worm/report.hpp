#pragma once

// Canonical text output: CSV numbers in %.17g, JSON with sorted keys and
// shortest round-trip doubles, NDJSON one record per line.

#include <filesystem>
#include <string>

#include "worm/estimates.hpp"
#include "worm/geometry.hpp"
#include "worm/spectral.hpp"

namespace worm::report {

// %.17g; non-finite values print as nan, inf, -inf.
std::string num(double v);

// Writes through a temporary file and renames it into place.
void write_file(const std::filesystem::path& p, const std::string& content);

std::string scan_csv(const geometry::ScanReport& r);

std::string certificate_json(const spectral::ZeroCertificate& z, double tol, const std::string& hash);
// k,re,im,residual,scale,multiplicity,method
std::string zeros_csv(const spectral::ZeroCertificate& z);

// "# strip ..." comment line, then s,re_zeta,im_zeta,residual.
std::string exceptional_csv(const spectral::ExceptionalExponents& e);
std::string exceptional_json(const spectral::ExceptionalExponents& e, double tol, const std::string& hash);

std::string record_json(const estimates::EstimateRecord& r, const std::string& hash);
std::string report_ndjson(const estimates::EstimateReport& r, const std::string& hash);
// One row per record: the listed parameter, ratio, lhs, rhs, flag.
std::string plot_csv(const estimates::EstimateReport& r, const std::string& param_key);

}  // namespace worm::report
