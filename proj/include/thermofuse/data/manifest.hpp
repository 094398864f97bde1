#ifndef THERMOFUSE_DATA_MANIFEST_HPP
#define THERMOFUSE_DATA_MANIFEST_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace thermofuse::data {

inline constexpr int kNumGrades = 6;

enum class Modality { RGB, THERMAL, FUSED };

inline const char* to_string(Modality m) {
    switch (m) {
        case Modality::RGB: return "RGB";
        case Modality::THERMAL: return "THERMAL";
        case Modality::FUSED: return "FUSED";
    }
    return "?";
}

inline Modality modality_from_string(const std::string& s) {
    if (s == "RGB" || s == "rgb") return Modality::RGB;
    if (s == "THERMAL" || s == "thermal") return Modality::THERMAL;
    if (s == "FUSED" || s == "fused") return Modality::FUSED;
    throw std::runtime_error("unknown modality: " + s);
}

struct ManifestParseError : std::runtime_error {
    explicit ManifestParseError(const std::string& what)
        : std::runtime_error("ManifestParseError: " + what) {}
};

struct MissingFile : std::runtime_error {
    explicit MissingFile(const std::string& path)
        : std::runtime_error("MissingFile: " + path) {}
};

struct BadGrade : std::runtime_error {
    explicit BadGrade(const std::string& value, const std::string& id)
        : std::runtime_error("BadGrade: '" + value + "' for sample " + id) {}
};

struct DuplicateId : std::runtime_error {
    explicit DuplicateId(const std::string& id)
        : std::runtime_error("DuplicateId: " + id) {}
};

struct SampleRecord {
    std::string id;
    std::string rgb_path;
    std::string thermal_raw_path;  // empty when absent
    int grade = 0;
    bool thermal_valid = false;

    bool in_modality(Modality m) const {
        return m == Modality::RGB || thermal_valid;
    }
};

struct DatasetManifest {
    std::vector<SampleRecord> records;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }

    std::array<std::int64_t, kNumGrades> class_counts(Modality m) const {
        std::array<std::int64_t, kNumGrades> c{};
        for (const auto& r : records)
            if (r.in_modality(m)) ++c[std::size_t(r.grade)];
        return c;
    }

    std::int64_t count(Modality m) const {
        std::int64_t n = 0;
        for (const auto& r : records) n += r.in_modality(m) ? 1 : 0;
        return n;
    }

    std::vector<std::size_t> eligible_indices(Modality m) const {
        std::vector<std::size_t> out;
        out.reserve(records.size());
        for (std::size_t i = 0; i < records.size(); ++i)
            if (records[i].in_modality(m)) out.push_back(i);
        return out;
    }

    const SampleRecord* find(const std::string& id) const {
        for (const auto& r : records)
            if (r.id == id) return &r;
        return nullptr;
    }
};

namespace detail {

// One CSV record; handles quoted fields ("" escapes a quote) and CRLF.
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += ch;
            }
        } else if (ch == '"' && field.empty()) {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else if (ch != '\r') {
            field += ch;
        }
    }
    out.push_back(std::move(field));
    return out;
}

inline bool parse_bool(const std::string& s, const std::string& id) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw ManifestParseError("thermal_valid must be true/false, got '" + s + "' for sample " + id);
}

}  // namespace detail

// CSV with header id,rgb_path,thermal_raw_path,grade,thermal_valid.
// Relative image paths are resolved against the manifest's directory;
// every referenced file must exist.
inline DatasetManifest load_manifest(const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw MissingFile(csv_path.string());
    const std::filesystem::path base = csv_path.parent_path();

    std::string line;
    if (!std::getline(in, line)) throw ManifestParseError("empty file (no header)");
    {
        auto hdr = detail::split_csv_line(line);
        const std::vector<std::string> want = {"id", "rgb_path", "thermal_raw_path", "grade",
                                               "thermal_valid"};
        if (hdr != std::vector<std::string>(want))
            throw ManifestParseError("bad header: " + line);
    }

    DatasetManifest mf;
    std::unordered_set<std::string> seen;
    std::size_t lineno = 1;
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        if (fp.is_relative()) fp = base / fp;
        return fp;
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto f = detail::split_csv_line(line);
        if (f.size() != 5)
            throw ManifestParseError("line " + std::to_string(lineno) + ": expected 5 fields, got " +
                                     std::to_string(f.size()));
        SampleRecord r;
        r.id = f[0];
        if (r.id.empty()) throw ManifestParseError("line " + std::to_string(lineno) + ": empty id");
        if (!seen.insert(r.id).second) throw DuplicateId(r.id);

        int g = -1;
        try {
            std::size_t pos = 0;
            g = std::stoi(f[3], &pos);
            if (pos != f[3].size()) g = -1;
        } catch (...) {
            g = -1;
        }
        if (g < 0 || g >= kNumGrades) throw BadGrade(f[3], r.id);
        r.grade = g;

        r.thermal_valid = detail::parse_bool(f[4], r.id);

        auto rgb = resolve(f[1]);
        if (f[1].empty() || !std::filesystem::exists(rgb)) throw MissingFile(f[1]);
        r.rgb_path = rgb.string();

        if (!f[2].empty()) {
            auto th = resolve(f[2]);
            if (!std::filesystem::exists(th)) throw MissingFile(f[2]);
            r.thermal_raw_path = th.string();
        } else if (r.thermal_valid) {
            throw MissingFile("(thermal_raw_path absent for thermal-valid sample " + r.id + ")");
        }
        mf.records.push_back(std::move(r));
    }
    return mf;
}

inline void save_manifest(const DatasetManifest& mf, const std::filesystem::path& csv_path,
                          bool relative_to_dir = true) {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + csv_path.string());
    const std::filesystem::path base = csv_path.parent_path();
    auto rel = [&](const std::string& p) -> std::string {
        if (!relative_to_dir || p.empty()) return p;
        std::error_code ec;
        auto r = std::filesystem::relative(p, base, ec);
        return ec ? p : r.string();
    };
    out << "id,rgb_path,thermal_raw_path,grade,thermal_valid\n";
    for (const auto& r : mf.records)
        out << r.id << ',' << rel(r.rgb_path) << ',' << rel(r.thermal_raw_path) << ',' << r.grade
            << ',' << (r.thermal_valid ? "true" : "false") << '\n';
}

}  // namespace thermofuse::data

#endif
