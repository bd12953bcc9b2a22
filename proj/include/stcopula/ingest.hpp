#pragma once

#include <chrono>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "stcopula/types.hpp"

namespace stcopula::ingest {

// One data row of a station time-series export.
struct RawRecord {
  std::string station_id;
  std::chrono::sys_days timestamp{};
  std::optional<double> value;  // absent = missing / unparseable
};

// Column-name map for observation CSVs (CPCB exports vary).
struct CsvSchema {
  std::string station_id = "station_id";
  std::string timestamp = "timestamp";
  std::string value = "value";
};

// Parses an observations CSV. Unparseable or nonpositive value fields
// become absent values, never errors; `warnings` collects a note per
// demoted nonpositive value.
// Throws: MissingColumn, EmptyInput.
std::vector<RawRecord> parse_csv(std::istream& in, const CsvSchema& schema,
                                 std::vector<std::string>* warnings = nullptr);

// Parses a stations CSV with columns id, lat, lon.
std::vector<Station> parse_stations_csv(std::istream& in);

// Buckets records onto the axis; cell = arithmetic mean of the bucket's
// present values, empty bucket = missing. Records outside the axis are
// ignored. Throws UnknownStation.
ObservationMatrix resample(const std::vector<RawRecord>& records,
                           const std::vector<Station>& stations,
                           const TimeAxis& axis);

// ISO-8601 date or date-time ("YYYY-MM-DD", optional "T" or " " time part).
std::optional<std::chrono::sys_days> parse_date(const std::string& text);

// Smallest monthly axis covering every record timestamp.
TimeAxis infer_axis(const std::vector<RawRecord>& records, Granularity g,
                    int custom_days = 0);

// Matrix export/import: one row per station, one column per bucket, empty
// cell for missing.
void write_matrix_csv(std::ostream& out, const ObservationMatrix& matrix);
ObservationMatrix read_matrix_csv(std::istream& in,
                                  const std::vector<Station>& stations,
                                  const TimeAxis& axis);

}  // namespace stcopula::ingest
