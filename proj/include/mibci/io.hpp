#pragma once
// Recording file formats.
//
// CSV:    header "# fs=<float>, channels=<l1>,<l2>,..."; one row per sample,
//         one column per channel. Companion "<stem>.markers.csv" with rows
//         "sample_index,label".
// Binary: same header fields plus "samples=<int>, encoding=f32le", then
//         channel-major 32-bit little-endian floats.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mibci/types.hpp"

namespace mibci {

enum class RecordingFormat { csv, raw_binary };

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string marker_path(const std::string& path) {
  std::filesystem::path p(path);
  p.replace_extension("");
  return p.string() + ".markers.csv";
}

struct Header {
  double fs{0.0};
  std::vector<std::string> channels;
  std::size_t samples{0};
  bool has_samples{false};
  std::string encoding;
};

inline Header parse_header(const std::string& line) {
  if (line.rfind("# ", 0) != 0) throw std::runtime_error("malformed header: missing '# '");
  Header h;
  std::string rest = line.substr(2);
  // fields are comma-space separated key=value; the channels value itself
  // contains commas, so split on ", " followed by a known key
  auto value_of = [&](const std::string& key) -> std::string {
    const std::string tag = key + "=";
    auto pos = rest.find(tag);
    if (pos == std::string::npos) return {};
    pos += tag.size();
    auto end = rest.size();
    for (const char* next : {"fs=", "channels=", "samples=", "encoding="}) {
      if (next == tag) continue;
      auto p = rest.find(std::string(", ") + next, pos);
      if (p != std::string::npos && p < end) end = p;
    }
    return rest.substr(pos, end - pos);
  };
  const std::string fs_s = value_of("fs");
  if (fs_s.empty()) throw std::runtime_error("malformed header: missing fs");
  h.fs = std::stod(fs_s);
  std::stringstream cs(value_of("channels"));
  std::string label;
  while (std::getline(cs, label, ',')) h.channels.push_back(label);
  if (h.channels.empty()) throw std::runtime_error("malformed header: missing channels");
  const std::string smp = value_of("samples");
  if (!smp.empty()) {
    h.samples = std::stoull(smp);
    h.has_samples = true;
  }
  h.encoding = value_of("encoding");
  return h;
}

inline std::vector<Marker> load_markers(const std::string& path) {
  std::vector<Marker> markers;
  std::ifstream in(path);
  if (!in) return markers;  // no companion file means no markers
  std::string line;
  std::size_t prev = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("malformed marker row: " + line);
    Marker m;
    m.sample_index = std::stoull(line.substr(0, comma));
    m.label = line.substr(comma + 1);
    if (!markers.empty() && m.sample_index < prev)
      throw std::runtime_error("markers not monotonic at index " + std::to_string(m.sample_index));
    prev = m.sample_index;
    markers.push_back(std::move(m));
  }
  return markers;
}

inline void save_markers(const std::string& path, const std::vector<Marker>& markers) {
  std::ofstream out(path);
  for (const auto& m : markers) out << m.sample_index << ',' << m.label << '\n';
}

inline std::string header_line(const Recording& rec, bool binary) {
  std::string line = "# fs=" + format_double(rec.sample_rate_hz) + ", channels=";
  for (std::size_t i = 0; i < rec.channel_labels.size(); ++i) {
    if (i) line += ',';
    line += rec.channel_labels[i];
  }
  if (binary) {
    line += ", samples=" + std::to_string(rec.n_samples());
    line += ", encoding=f32le";
  }
  return line;
}

}  // namespace detail

inline void save_recording(const Recording& rec, const std::string& path,
                           RecordingFormat format) {
  rec.validate();
  if (format == RecordingFormat::csv) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << detail::header_line(rec, false) << '\n';
    for (std::size_t s = 0; s < rec.n_samples(); ++s) {
      for (std::size_t ch = 0; ch < rec.n_channels(); ++ch) {
        if (ch) out << ',';
        out << detail::format_double(rec.samples(ch, s));
      }
      out << '\n';
    }
  } else {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << detail::header_line(rec, true) << '\n';
    std::vector<float> row(rec.n_samples());
    for (std::size_t ch = 0; ch < rec.n_channels(); ++ch) {
      for (std::size_t s = 0; s < rec.n_samples(); ++s)
        row[s] = static_cast<float>(rec.samples(ch, s));
      out.write(reinterpret_cast<const char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
  }
  detail::save_markers(detail::marker_path(path), rec.markers);
}

inline Recording load_recording(const std::string& path, RecordingFormat format) {
  std::ifstream in(path, format == RecordingFormat::raw_binary ? std::ios::binary
                                                               : std::ios::in);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string first;
  std::getline(in, first);
  const detail::Header h = detail::parse_header(first);

  Recording rec;
  rec.channel_labels = h.channels;
  rec.sample_rate_hz = h.fs;
  const std::size_t n_ch = h.channels.size();

  if (format == RecordingFormat::csv) {
    std::vector<double> values;
    std::string line;
    std::size_t n_rows = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ls(line);
      std::string cell;
      std::size_t n_cells = 0;
      while (std::getline(ls, cell, ',')) {
        values.push_back(std::stod(cell));
        ++n_cells;
      }
      if (n_cells != n_ch)
        throw std::runtime_error("sample row has " + std::to_string(n_cells) +
                                 " columns, expected " + std::to_string(n_ch));
      ++n_rows;
    }
    rec.samples.resize(n_ch, n_rows);
    for (std::size_t s = 0; s < n_rows; ++s)
      for (std::size_t ch = 0; ch < n_ch; ++ch) rec.samples(ch, s) = values[s * n_ch + ch];
  } else {
    if (!h.has_samples) throw std::runtime_error("binary header missing samples=");
    if (h.encoding != "f32le") throw std::runtime_error("unsupported encoding: " + h.encoding);
    rec.samples.resize(n_ch, h.samples);
    std::vector<float> row(h.samples);
    for (std::size_t ch = 0; ch < n_ch; ++ch) {
      in.read(reinterpret_cast<char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
      if (static_cast<std::size_t>(in.gcount()) != row.size() * sizeof(float))
        throw std::runtime_error("sample count mismatch: file truncated");
      for (std::size_t s = 0; s < h.samples; ++s) rec.samples(ch, s) = row[s];
    }
  }

  rec.markers = detail::load_markers(detail::marker_path(path));
  for (const auto& m : rec.markers)
    if (m.sample_index >= rec.n_samples()) throw std::runtime_error("marker out of range");
  rec.validate();
  return rec;
}

}  // namespace mibci
