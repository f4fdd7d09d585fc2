#pragma once

// CSV and JSON serialization of sweep results. Floats are written so that
// reading them back reproduces every bit (17 significant digits in CSV,
// shortest round-trip form in JSON; NaN becomes "nan" in CSV and null in JSON).

#include "dtrimer/sweep.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace dtrimer {

// Header row of the per-point CSV.
const std::vector<std::string>& csv_columns();

void write_records_csv(std::ostream& out, const std::vector<PointRecord>& records);
std::vector<PointRecord> read_records_csv(std::istream& in);

// Provenance block shared by every JSON document: tool, version, timestamp.
// The timestamp comes from SOURCE_DATE_EPOCH when that is set.
std::string output_timestamp();

std::string records_to_json(const std::vector<PointRecord>& records, const ModelParams& base,
                            double g_min, double g_max);
std::vector<PointRecord> records_from_json(const std::string& text);

std::string grid_to_json(const PhaseDiagramGrid& grid);
PhaseDiagramGrid grid_from_json(const std::string& text);

// Exact decimal form used in CSV cells.
std::string format_double(double value);

}  // namespace dtrimer
