#include "ddpose/exchange.hpp"

#include <charconv>
#include <cstdio>
#include <map>
#include <optional>

#include "ddpose/errors.hpp"
#include "ddpose/io.hpp"

namespace ddpose {
namespace {

constexpr std::string_view kMagic = "# ddpose-exchange 1";
constexpr std::string_view kColumns = "epoch,receiver_id,satellite_id,doppler_shift_hz,snr_db";

struct Field {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Field> split_fields(std::string_view line) {
  std::vector<Field> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? line.size() : comma;
    out.push_back({line.substr(start, end - start), start + 1});
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

class LineParser {
 public:
  LineParser(const std::string& source, std::size_t line) : source_(source), line_(line) {}

  [[noreturn]] void fail(std::size_t column, const std::string& message) const {
    throw ParseError(source_, line_, column, message);
  }

  double number(const Field& f, const char* what) const {
    double v = 0.0;
    const char* first = f.text.data();
    const char* last = first + f.text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (f.text.empty() || ec != std::errc() || ptr != last) {
      fail(f.column, std::string("invalid ") + what + " '" + std::string(f.text) + "'");
    }
    return v;
  }

  int integer(const Field& f, const char* what) const {
    int v = 0;
    const char* first = f.text.data();
    const char* last = first + f.text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (f.text.empty() || ec != std::errc() || ptr != last) {
      fail(f.column, std::string("invalid ") + what + " '" + std::string(f.text) + "'");
    }
    return v;
  }

  UtcTime epoch(const Field& f) const {
    try {
      return UtcTime::parse_iso8601(f.text);
    } catch (const std::exception& e) {
      fail(f.column, std::string("invalid epoch: ") + e.what());
    }
  }

 private:
  const std::string& source_;
  std::size_t line_;
};

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::size_t ExchangeFile::record_count() const {
  std::size_t n = 0;
  for (const auto& e : epochs) n += e.base.size() + e.ut.size();
  return n;
}

std::string format_exchange(const ExchangeFile& file) {
  std::string out;
  out += kMagic;
  out += "\n# base_ecef_m," + format_double(file.base_position.x()) + "," + format_double(file.base_position.y()) +
         "," + format_double(file.base_position.z()) + "\n";
  out += "# carrier_frequency_hz," + format_double(file.carrier_frequency_hz) + "\n";
  out += kColumns;
  out += "\n";
  for (const auto& set : file.epochs) {
    const std::string epoch = set.epoch.to_iso8601();
    for (const auto* list : {&set.base, &set.ut}) {
      for (const auto& m : *list) {
        out += epoch + "," + std::string(to_string(m.receiver())) + "," + std::to_string(m.satellite_id()) + "," +
               format_double(m.doppler_shift()) + "," + format_double(m.snr()) + "\n";
      }
    }
  }
  for (const auto& t : file.truth) {
    out += "truth," + t.epoch.to_iso8601();
    for (int i = 0; i < 3; ++i) out += "," + format_double(t.position[i]);
    for (int i = 0; i < 3; ++i) out += "," + format_double(t.velocity[i]);
    out += "\n";
  }
  out += "# end," + std::to_string(file.record_count()) + "\n";
  return out;
}

ExchangeFile parse_exchange(std::string_view text, const std::string& source_name) {
  ExchangeFile file;
  std::optional<double> carrier;
  bool have_base = false, have_columns = false, ended = false;
  std::size_t records = 0;
  std::map<UtcTime, MeasurementSet> by_epoch;
  UtcTime last_epoch;
  bool any_record = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const bool terminated = nl != std::string_view::npos;
    std::string_view line = text.substr(pos, (terminated ? nl : text.size()) - pos);
    pos = terminated ? nl + 1 : text.size();
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const LineParser p(source_name, line_no);

    if (ended) {
      if (line.empty()) continue;
      p.fail(1, "content after end marker");
    }
    if (line_no == 1) {
      if (line != kMagic) p.fail(1, "missing exchange header '" + std::string(kMagic) + "'");
      continue;
    }
    if (line.empty()) continue;

    auto fields = split_fields(line);
    if (line.starts_with("# ")) {
      fields.front().text.remove_prefix(2);
      fields.front().column += 2;
      const std::string_view key = fields.front().text;
      if (key == "base_ecef_m") {
        if (fields.size() != 4) p.fail(1, "base_ecef_m needs three coordinates");
        for (int i = 0; i < 3; ++i) file.base_position[i] = p.number(fields[i + 1], "coordinate");
        have_base = true;
      } else if (key == "carrier_frequency_hz") {
        if (fields.size() != 2) p.fail(1, "carrier_frequency_hz needs one value");
        carrier = p.number(fields[1], "carrier frequency");
        if (!(*carrier > 0.0)) p.fail(fields[1].column, "carrier frequency must be positive");
      } else if (key == "end") {
        if (fields.size() != 2) p.fail(1, "end marker needs a record count");
        const int declared = p.integer(fields[1], "record count");
        if (declared < 0 || static_cast<std::size_t>(declared) != records) {
          p.fail(fields[1].column, "end marker declares " + std::string(fields[1].text) + " records, found " +
                                       std::to_string(records));
        }
        ended = true;
      } else {
        p.fail(3, "unknown header key '" + std::string(key) + "'");
      }
      continue;
    }
    if (line == kColumns) {
      if (!have_base || !carrier) p.fail(1, "column header before base_ecef_m and carrier_frequency_hz");
      have_columns = true;
      continue;
    }
    if (!have_columns) p.fail(1, "record before the column header");
    if (!terminated) p.fail(line.size() + 1, "truncated record (no line terminator)");

    if (fields.front().text == "truth") {
      if (fields.size() != 8) p.fail(1, "truth line needs epoch and six state components");
      TruthSample t;
      t.epoch = p.epoch(fields[1]);
      for (int i = 0; i < 3; ++i) t.position[i] = p.number(fields[i + 2], "truth position");
      for (int i = 0; i < 3; ++i) t.velocity[i] = p.number(fields[i + 5], "truth velocity");
      file.truth.push_back(t);
      continue;
    }
    if (fields.size() != 5) {
      p.fail(1, "expected 5 fields, found " + std::to_string(fields.size()));
    }
    const UtcTime epoch = p.epoch(fields[0]);
    if (any_record && epoch < last_epoch) p.fail(fields[0].column, "epochs must be non-decreasing");
    ReceiverId receiver{};
    try {
      receiver = receiver_from_string(fields[1].text);
    } catch (const std::exception& e) {
      p.fail(fields[1].column, e.what());
    }
    const int sat = p.integer(fields[2], "satellite id");
    const double doppler = p.number(fields[3], "doppler shift");
    const double snr = p.number(fields[4], "snr");

    MeasurementSet& set = by_epoch[epoch];
    set.epoch = epoch;
    auto& list = receiver == ReceiverId::base ? set.base : set.ut;
    for (const auto& m : list) {
      if (m.satellite_id() == sat) p.fail(fields[2].column, "duplicate satellite for this receiver and epoch");
    }
    list.push_back(DopplerMeasurement::from_doppler(sat, epoch, receiver, doppler, wavelength_for(*carrier), snr));
    last_epoch = epoch;
    any_record = true;
    ++records;
  }
  if (!ended) throw ParseError(source_name, line_no + 1, 0, "truncated file: missing end marker");

  file.carrier_frequency_hz = *carrier;
  for (auto& [epoch, set] : by_epoch) {
    set.update_common();
    file.epochs.push_back(std::move(set));
  }
  return file;
}

ExchangeFile read_exchange_file(const std::filesystem::path& path) {
  return parse_exchange(read_text_file(path), path.string());
}

void write_exchange_file(const std::filesystem::path& path, const ExchangeFile& file) {
  write_file_atomic(path, format_exchange(file));
}

}  // namespace ddpose
