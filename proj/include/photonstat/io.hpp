// io.hpp - file formats: PHTAG binary time tags, CSV forms for tags,
// histograms, g2 curves, spectra, sweep manifests, and key=value reports.
//
// PHTAG layout: 8-byte magic "PHTAG\0\0\x01", then 9-byte records, each a
// channel byte (0=A, 1=B) followed by an unsigned 64-bit little-endian
// picosecond timestamp. Records sorted by timestamp. The run duration is not
// stored; readers infer last tag + 1 ps.
//
// All doubles are printed with %.17g so text round trips are lossless and
// reruns are byte identical.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "photonstat/correlate.hpp"
#include "photonstat/spectrum.hpp"
#include "photonstat/timetags.hpp"

namespace photonstat {

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::array<unsigned char, 8> PHTAG_MAGIC = {'P', 'H', 'T', 'A', 'G', 0, 0, 1};

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void put_u64_le(unsigned char* p, uint64_t v) {
    for (int i = 0; i < 8; ++i) p[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
}

inline uint64_t get_u64_le(const unsigned char* p) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
    return v;
}

inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& s, const std::string& what, size_t byte_offset) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
        if (pos != s.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw IoError("malformed " + what + " value '" + s + "' at byte offset " +
                      std::to_string(byte_offset));
    }
}

// Line-oriented reader that tracks the byte offset of each line start.
class CsvReader {
  public:
    explicit CsvReader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
        if (!in_) throw IoError("cannot open " + path);
    }
    bool next_line(std::string& line) {
        line_offset_ = next_offset_;
        if (!std::getline(in_, line)) return false;
        next_offset_ += line.size() + 1;
        return true;
    }
    size_t line_offset() const { return line_offset_; }
    const std::string& path() const { return path_; }

  private:
    std::ifstream in_;
    std::string path_;
    size_t line_offset_ = 0;
    size_t next_offset_ = 0;
};

inline void expect_header(CsvReader& r, const std::string& header) {
    std::string line;
    if (!r.next_line(line) || line != header)
        throw IoError(r.path() + ": expected header '" + header + "' at byte offset 0");
}

inline std::ofstream open_out(const std::string& path, bool binary = false) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw IoError("cannot open " + path + " for writing");
    return out;
}

}  // namespace detail

inline void write_phtag(const std::string& path, const TimeTagStream& stream) {
    std::ofstream out = detail::open_out(path, true);
    out.write(reinterpret_cast<const char*>(PHTAG_MAGIC.data()), PHTAG_MAGIC.size());
    std::vector<unsigned char> rec(9);
    for (const TimeTag& tag : stream.tags) {
        rec[0] = static_cast<unsigned char>(tag.channel);
        detail::put_u64_le(rec.data() + 1, tag.t_ps);
        out.write(reinterpret_cast<const char*>(rec.data()), 9);
    }
    if (!out) throw IoError("write failed for " + path);
}

inline TimeTagStream read_phtag(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::array<unsigned char, 8> magic{};
    in.read(reinterpret_cast<char*>(magic.data()), magic.size());
    if (in.gcount() != 8 || magic != PHTAG_MAGIC)
        throw IoError(path + ": bad PHTAG magic at byte offset 0");

    std::vector<TimeTag> tags;
    std::vector<unsigned char> rec(9);
    size_t offset = 8;
    for (;;) {
        in.read(reinterpret_cast<char*>(rec.data()), 9);
        const std::streamsize got = in.gcount();
        if (got == 0) break;
        if (got != 9)
            throw IoError(path + ": truncated record at byte offset " + std::to_string(offset));
        if (rec[0] > 1)
            throw IoError(path + ": invalid channel " + std::to_string(int(rec[0])) +
                          " at byte offset " + std::to_string(offset));
        const uint64_t t = detail::get_u64_le(rec.data() + 1);
        if (!tags.empty() && t < tags.back().t_ps)
            throw IoError(path + ": unsorted timestamp at byte offset " + std::to_string(offset));
        tags.push_back({t, static_cast<Channel>(rec[0])});
        offset += 9;
    }
    const uint64_t duration = tags.empty() ? 1 : tags.back().t_ps + 1;
    return TimeTagStream::from_tags(std::move(tags), duration);
}

inline void write_tags_csv(const std::string& path, const TimeTagStream& stream) {
    std::ofstream out = detail::open_out(path);
    out << "channel,t_ps\n";
    for (const TimeTag& tag : stream.tags)
        out << (tag.channel == Channel::A ? 'A' : 'B') << ',' << tag.t_ps << '\n';
    if (!out) throw IoError("write failed for " + path);
}

inline TimeTagStream read_tags_csv(const std::string& path) {
    detail::CsvReader r(path);
    detail::expect_header(r, "channel,t_ps");
    std::vector<TimeTag> tags;
    std::string line;
    while (r.next_line(line)) {
        if (line.empty()) continue;
        const auto cells = detail::split_csv_row(line);
        if (cells.size() != 2)
            throw IoError(path + ": expected 2 columns at byte offset " +
                          std::to_string(r.line_offset()));
        Channel ch;
        if (cells[0] == "A" || cells[0] == "0")
            ch = Channel::A;
        else if (cells[0] == "B" || cells[0] == "1")
            ch = Channel::B;
        else
            throw IoError(path + ": invalid channel '" + cells[0] + "' at byte offset " +
                          std::to_string(r.line_offset()));
        uint64_t t = 0;
        try {
            size_t pos = 0;
            t = std::stoull(cells[1], &pos);
            if (pos != cells[1].size()) throw std::invalid_argument("trailing junk");
        } catch (const std::exception&) {
            throw IoError(path + ": malformed t_ps '" + cells[1] + "' at byte offset " +
                          std::to_string(r.line_offset()));
        }
        if (!tags.empty() && t < tags.back().t_ps)
            throw IoError(path + ": unsorted timestamp at byte offset " +
                          std::to_string(r.line_offset()));
        tags.push_back({t, ch});
    }
    const uint64_t duration = tags.empty() ? 1 : tags.back().t_ps + 1;
    return TimeTagStream::from_tags(std::move(tags), duration);
}

inline void write_histogram_csv(const std::string& path, const CoincidenceHistogram& h) {
    std::ofstream out = detail::open_out(path);
    out << "tau_ps,counts\n";
    for (size_t i = 0; i < h.counts.size(); ++i)
        out << h.tau_center_ps(i) << ',' << h.counts[i] << '\n';
    if (!out) throw IoError("write failed for " + path);
}

inline void write_g2_csv(const std::string& path, const G2Curve& curve) {
    std::ofstream out = detail::open_out(path);
    out << "tau_ps,g2,sigma\n";
    for (size_t i = 0; i < curve.g2.size(); ++i)
        out << detail::fmt_double(curve.tau_ps[i]) << ',' << detail::fmt_double(curve.g2[i]) << ','
            << detail::fmt_double(curve.sigma[i]) << '\n';
    if (!out) throw IoError("write failed for " + path);
}

// Geometry (bin width) is inferred from the tau spacing; channel totals and
// duration are not stored in the CSV and come back as zero.
inline G2Curve read_g2_csv(const std::string& path) {
    detail::CsvReader r(path);
    detail::expect_header(r, "tau_ps,g2,sigma");
    G2Curve curve;
    std::string line;
    while (r.next_line(line)) {
        if (line.empty()) continue;
        const auto cells = detail::split_csv_row(line);
        if (cells.size() != 3)
            throw IoError(path + ": expected 3 columns at byte offset " +
                          std::to_string(r.line_offset()));
        curve.tau_ps.push_back(detail::parse_double(cells[0], "tau_ps", r.line_offset()));
        curve.g2.push_back(detail::parse_double(cells[1], "g2", r.line_offset()));
        curve.sigma.push_back(detail::parse_double(cells[2], "sigma", r.line_offset()));
    }
    if (curve.tau_ps.size() < 2) throw IoError(path + ": g2 curve needs at least 2 rows");
    const double step = curve.tau_ps[1] - curve.tau_ps[0];
    for (size_t i = 2; i < curve.tau_ps.size(); ++i) {
        const double d = curve.tau_ps[i] - curve.tau_ps[i - 1];
        if (std::fabs(d - step) > 1e-6 * std::fabs(step))
            throw IoError(path + ": nonuniform tau grid at byte offset " +
                          std::to_string(r.line_offset()));
    }
    curve.bin_width_ps = static_cast<int64_t>(std::llround(step));
    if (curve.bin_width_ps <= 0) throw IoError(path + ": nonpositive bin width");
    return curve;
}

inline void write_spectrum_csv(const std::string& path, const Spectrum& s) {
    std::ofstream out = detail::open_out(path);
    out << "wavelength_nm,intensity\n";
    for (size_t i = 0; i < s.wavelength_nm.size(); ++i)
        out << detail::fmt_double(s.wavelength_nm[i]) << ',' << detail::fmt_double(s.intensity[i])
            << '\n';
    if (!out) throw IoError("write failed for " + path);
}

inline Spectrum read_spectrum_csv(const std::string& path) {
    detail::CsvReader r(path);
    detail::expect_header(r, "wavelength_nm,intensity");
    Spectrum s;
    std::string line;
    while (r.next_line(line)) {
        if (line.empty()) continue;
        const auto cells = detail::split_csv_row(line);
        if (cells.size() != 2)
            throw IoError(path + ": expected 2 columns at byte offset " +
                          std::to_string(r.line_offset()));
        s.wavelength_nm.push_back(detail::parse_double(cells[0], "wavelength_nm", r.line_offset()));
        s.intensity.push_back(detail::parse_double(cells[1], "intensity", r.line_offset()));
    }
    try {
        s.validate();
    } catch (const std::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    return s;
}

// Sweep manifest: either `P_uW,g2_file` rows pointing at g2 CSVs, or
// `P_uW,rate_cps,sigma_cps` rows carrying saturation data directly.
enum class ManifestKind { g2_files, saturation_points };

struct ManifestEntry {
    double p_uW = 0.0;
    std::string g2_file;
    double rate_cps = 0.0;
    double sigma_cps = 0.0;
};

struct Manifest {
    ManifestKind kind = ManifestKind::g2_files;
    std::vector<ManifestEntry> entries;
};

inline Manifest read_manifest(const std::string& path) {
    detail::CsvReader r(path);
    std::string line;
    if (!r.next_line(line)) throw IoError(path + ": empty manifest");
    Manifest m;
    if (line == "P_uW,g2_file")
        m.kind = ManifestKind::g2_files;
    else if (line == "P_uW,rate_cps,sigma_cps")
        m.kind = ManifestKind::saturation_points;
    else
        throw IoError(path + ": unknown manifest header '" + line + "' at byte offset 0");
    while (r.next_line(line)) {
        if (line.empty()) continue;
        const auto cells = detail::split_csv_row(line);
        ManifestEntry e;
        if (m.kind == ManifestKind::g2_files) {
            if (cells.size() != 2)
                throw IoError(path + ": expected 2 columns at byte offset " +
                              std::to_string(r.line_offset()));
            e.p_uW = detail::parse_double(cells[0], "P_uW", r.line_offset());
            e.g2_file = cells[1];
        } else {
            if (cells.size() != 3)
                throw IoError(path + ": expected 3 columns at byte offset " +
                              std::to_string(r.line_offset()));
            e.p_uW = detail::parse_double(cells[0], "P_uW", r.line_offset());
            e.rate_cps = detail::parse_double(cells[1], "rate_cps", r.line_offset());
            e.sigma_cps = detail::parse_double(cells[2], "sigma_cps", r.line_offset());
        }
        m.entries.push_back(std::move(e));
    }
    if (m.entries.empty()) throw IoError(path + ": manifest has no entries");
    return m;
}

inline void write_manifest(const std::string& path, const Manifest& m) {
    std::ofstream out = detail::open_out(path);
    if (m.kind == ManifestKind::g2_files) {
        out << "P_uW,g2_file\n";
        for (const ManifestEntry& e : m.entries)
            out << detail::fmt_double(e.p_uW) << ',' << e.g2_file << '\n';
    } else {
        out << "P_uW,rate_cps,sigma_cps\n";
        for (const ManifestEntry& e : m.entries)
            out << detail::fmt_double(e.p_uW) << ',' << detail::fmt_double(e.rate_cps) << ','
                << detail::fmt_double(e.sigma_cps) << '\n';
    }
    if (!out) throw IoError("write failed for " + path);
}

// Ordered key=value report ('#' starts a comment line).
using Report = std::vector<std::pair<std::string, std::string>>;

inline void write_report(const std::string& path, const Report& report) {
    std::ofstream out = detail::open_out(path);
    for (const auto& [k, v] : report) out << k << '=' << v << '\n';
    if (!out) throw IoError("write failed for " + path);
}

inline Report read_report(const std::string& path) {
    detail::CsvReader r(path);
    Report report;
    std::string line;
    while (r.next_line(line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw IoError(path + ": missing '=' at byte offset " +
                          std::to_string(r.line_offset()));
        report.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
    return report;
}

}  // namespace photonstat
