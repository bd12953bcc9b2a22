#include "stcopula/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_map>

#include "stcopula/csv.hpp"
#include "stcopula/errors.hpp"

namespace stcopula::ingest {

namespace chr = std::chrono;

std::optional<chr::sys_days> parse_date(const std::string& text) {
  int y = 0;
  unsigned m = 0, d = 0;
  if (std::sscanf(text.c_str(), "%d-%u-%u", &y, &m, &d) != 3) return std::nullopt;
  chr::year_month_day ymd = chr::year{y} / chr::month{m} / chr::day{d};
  if (!ymd.ok()) return std::nullopt;
  return chr::sys_days{ymd};
}

namespace {

std::optional<double> parse_value(const std::string& text) {
  if (text.empty()) return std::nullopt;
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str()) return std::nullopt;
  while (*end == ' ') ++end;
  if (*end != '\0') return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

int find_column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

std::vector<RawRecord> parse_csv(std::istream& in, const CsvSchema& schema,
                                 std::vector<std::string>* warnings) {
  auto rows = csv::read_all(in);
  if (rows.empty()) throw data_error("EmptyInput", "observations stream has no header");

  const auto& header = rows.front();
  int col_station = find_column(header, schema.station_id);
  int col_time = find_column(header, schema.timestamp);
  int col_value = find_column(header, schema.value);
  if (col_station < 0) throw data_error("MissingColumn", "no column '" + schema.station_id + "'");
  if (col_time < 0) throw data_error("MissingColumn", "no column '" + schema.timestamp + "'");
  if (col_value < 0) throw data_error("MissingColumn", "no column '" + schema.value + "'");

  if (rows.size() == 1) throw data_error("EmptyInput", "observations stream has no data rows");

  std::vector<RawRecord> records;
  records.reserve(rows.size() - 1);
  int max_col = std::max({col_station, col_time, col_value});
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (static_cast<int>(row.size()) <= max_col) {
      throw data_error("MalformedRow", "row " + std::to_string(r + 1) + " has too few fields");
    }
    RawRecord rec;
    rec.station_id = row[col_station];
    if (rec.station_id.empty()) {
      throw data_error("MalformedRow", "row " + std::to_string(r + 1) + " has empty station id");
    }
    auto day = parse_date(row[col_time]);
    if (!day) {
      throw data_error("MalformedRow",
                       "row " + std::to_string(r + 1) + ": unparseable timestamp '" +
                           row[col_time] + "'");
    }
    rec.timestamp = *day;
    rec.value = parse_value(row[col_value]);
    // the field maps to R+: nonpositive readings are demoted to missing
    if (rec.value && *rec.value <= 0.0) {
      if (warnings) {
        warnings->push_back("station " + rec.station_id + " @ " + row[col_time] +
                            ": nonpositive value " + row[col_value] + " treated as missing");
      }
      rec.value.reset();
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<Station> parse_stations_csv(std::istream& in) {
  auto rows = csv::read_all(in);
  if (rows.empty()) throw data_error("EmptyInput", "stations stream has no header");
  const auto& header = rows.front();
  int col_id = find_column(header, "id");
  int col_lat = find_column(header, "lat");
  int col_lon = find_column(header, "lon");
  if (col_id < 0 || col_lat < 0 || col_lon < 0) {
    throw data_error("MissingColumn", "stations CSV needs columns id, lat, lon");
  }
  if (rows.size() == 1) throw data_error("EmptyInput", "stations stream has no data rows");

  std::vector<Station> stations;
  int max_col = std::max({col_id, col_lat, col_lon});
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (static_cast<int>(row.size()) <= max_col) {
      throw data_error("MalformedRow", "stations row " + std::to_string(r + 1) + " has too few fields");
    }
    auto lat = parse_value(row[col_lat]);
    auto lon = parse_value(row[col_lon]);
    if (!lat || !lon) {
      throw data_error("MalformedRow", "stations row " + std::to_string(r + 1) + ": bad coordinates");
    }
    stations.push_back(Station{row[col_id], *lat, *lon});
  }
  return stations;
}

TimeAxis infer_axis(const std::vector<RawRecord>& records, Granularity g, int custom_days) {
  if (records.empty()) throw data_error("EmptyInput", "no records to infer a time axis from");
  chr::sys_days lo = records.front().timestamp;
  chr::sys_days hi = lo;
  for (const auto& r : records) {
    lo = std::min(lo, r.timestamp);
    hi = std::max(hi, r.timestamp);
  }
  TimeAxis axis;
  axis.granularity = g;
  axis.custom_days = custom_days;
  if (g == Granularity::Custom) {
    axis.start = chr::year_month_day{lo};
    axis.count = static_cast<int>((hi - lo).count() / custom_days) + 1;
  } else {
    chr::year_month_day lod{lo}, hid{hi};
    axis.start = lod.year() / lod.month() / chr::day{1};
    int span_months = (int(hid.year()) - int(lod.year())) * 12 +
                      (int(unsigned(hid.month())) - int(unsigned(lod.month())));
    axis.count = span_months / axis.months_per_bucket() + 1;
  }
  if (axis.count < 2) axis.count = 2;
  return axis;
}

ObservationMatrix resample(const std::vector<RawRecord>& records,
                           const std::vector<Station>& stations,
                           const TimeAxis& axis) {
  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < stations.size(); ++i) {
    index.emplace(stations[i].id, static_cast<int>(i));
  }

  int n = static_cast<int>(stations.size());
  int k = axis.count;
  std::vector<double> sums(static_cast<std::size_t>(n) * k, 0.0);
  std::vector<int> counts(static_cast<std::size_t>(n) * k, 0);

  for (const auto& rec : records) {
    auto it = index.find(rec.station_id);
    if (it == index.end()) {
      throw data_error("UnknownStation", "record references station '" + rec.station_id +
                                             "' not in the station list");
    }
    if (!rec.value) continue;
    int j = axis.bucket_of(rec.timestamp);
    if (j < 0) continue;  // outside the axis
    std::size_t cell = static_cast<std::size_t>(it->second) * k + j;
    sums[cell] += *rec.value;
    counts[cell] += 1;
  }

  ObservationMatrix matrix(stations, axis);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) {
      std::size_t cell = static_cast<std::size_t>(i) * k + j;
      if (counts[cell] > 0) {
        matrix.set(i, j, sums[cell] / counts[cell]);
      }
    }
  }
  return matrix;
}

void write_matrix_csv(std::ostream& out, const ObservationMatrix& matrix) {
  out << "station_id";
  for (int j = 0; j < matrix.k(); ++j) out << "," << matrix.time_axis().bucket_label(j);
  out << "\n";
  for (int i = 0; i < matrix.n(); ++i) {
    out << matrix.stations()[i].id;
    for (int j = 0; j < matrix.k(); ++j) {
      out << ",";
      if (matrix.observed(i, j)) out << csv::fmt(matrix.value(i, j));
    }
    out << "\n";
  }
}

ObservationMatrix read_matrix_csv(std::istream& in, const std::vector<Station>& stations,
                                  const TimeAxis& axis) {
  auto rows = csv::read_all(in);
  if (rows.size() != stations.size() + 1) {
    throw data_error("MalformedRow", "matrix CSV has " + std::to_string(rows.size()) +
                                       " rows, expected " + std::to_string(stations.size() + 1));
  }
  ObservationMatrix matrix(stations, axis);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (static_cast<int>(row.size()) != axis.count + 1) {
      throw data_error("MalformedRow", "matrix CSV row " + std::to_string(r + 1) +
                                         " has wrong column count");
    }
    int i = static_cast<int>(r) - 1;
    if (row[0] != stations[i].id) {
      throw data_error("UnknownStation", "matrix CSV row order does not match station list at '" +
                                             row[0] + "'");
    }
    for (int j = 0; j < axis.count; ++j) {
      const std::string& cell = row[j + 1];
      if (cell.empty()) continue;
      auto v = parse_value(cell);
      if (!v) throw data_error("MalformedRow", "matrix CSV has unparseable cell '" + cell + "'");
      matrix.set(i, j, *v);
    }
  }
  return matrix;
}

}  // namespace stcopula::ingest
