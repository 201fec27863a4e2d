#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ganids/error.hpp"
#include "ganids/io.hpp"
#include "ganids/matrix.hpp"

namespace ganids {

// ---------------------------------------------------------------------------
// label/text normalization
// ---------------------------------------------------------------------------

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

// The public flow CSVs carry stray spaces and several dash encodings in the
// label column ("Web Attack <en-dash> Brute Force"). Trim and fold every dash
// variant to an ASCII hyphen so grouping tables can use one spelling.
inline std::string normalize_label(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        unsigned char c = static_cast<unsigned char>(raw[i]);
        if (c == 0xE2 && i + 2 < raw.size() &&
            static_cast<unsigned char>(raw[i + 1]) == 0x80) {
            unsigned char third = static_cast<unsigned char>(raw[i + 2]);
            if (third == 0x93 || third == 0x94) {  // en dash, em dash
                out.push_back('-');
                i += 2;
                continue;
            }
        }
        if (c == 0x96 || c == 0x97) {  // latin-1 en/em dash bytes seen in the wild
            out.push_back('-');
            continue;
        }
        out.push_back(static_cast<char>(c));
    }
    return trim(out);
}

// Numeric cell parse. "Infinity", "inf", "NaN" spellings (any case) parse to
// non-finite doubles; anything unparseable becomes a quiet NaN. Either way the
// cell is an invalid marker for the cleaning stage.
inline double parse_cell(const std::string& cell) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) return std::nan("");
    while (*end != '\0') {
        if (!std::isspace(static_cast<unsigned char>(*end))) return std::nan("");
        ++end;
    }
    return v;
}

// ---------------------------------------------------------------------------
// domain types
// ---------------------------------------------------------------------------

// Raw parsed table: every data row retained, invalid numeric cells kept as
// non-finite markers. Cleaning is a separate stage.
struct RawFlowTable {
    std::vector<std::string> column_names;  // full header, label included
    std::string label_column;
    std::size_t label_index = 0;

    std::vector<std::string> feature_names;  // column_names minus the label
    Matrix cells;                            // n_rows x feature_names.size()
    std::vector<std::string> labels;         // normalized

    std::size_t n_rows() const { return labels.size(); }
};

struct CleanDataset {
    std::vector<std::string> feature_names;
    Matrix features;                      // n_rows x n_features, all finite
    std::vector<std::uint32_t> labels;    // index into class_names
    std::vector<std::string> class_names; // ascending; fixes the class order
    std::vector<std::size_t> class_counts;

    std::size_t n_rows() const { return labels.size(); }
    std::size_t n_features() const { return feature_names.size(); }

    const std::string& label_name(std::size_t row) const { return class_names[labels[row]]; }

    std::optional<std::uint32_t> find_class(const std::string& name) const {
        for (std::uint32_t i = 0; i < class_names.size(); ++i)
            if (class_names[i] == name) return i;
        return std::nullopt;
    }

    std::uint32_t class_index(const std::string& name) const {
        auto c = find_class(name);
        if (!c) throw DataError("unknown class: " + name);
        return *c;
    }

    std::vector<std::size_t> rows_of_class(std::uint32_t cid) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == cid) out.push_back(i);
        return out;
    }

    std::size_t feature_index(const std::string& name) const {
        for (std::size_t i = 0; i < feature_names.size(); ++i)
            if (feature_names[i] == name) return i;
        throw DataError("unknown feature column: " + name);
    }

    bool has_feature(const std::string& name) const {
        return std::find(feature_names.begin(), feature_names.end(), name) != feature_names.end();
    }
};

// original label -> general class
struct ClassGrouping {
    std::map<std::string, std::string> mapping;

    const std::string& general_class(const std::string& label) const {
        auto it = mapping.find(label);
        if (it == mapping.end()) throw DataError("label has no grouping entry: '" + label + "'");
        return it->second;
    }
};

// The 15-class flow dataset regrouped into eight general classes.
inline ClassGrouping default_grouping() {
    ClassGrouping g;
    auto put = [&](const char* from, const char* to) { g.mapping.emplace(from, to); };
    put("BENIGN", "Benign");
    put("Benign", "Benign");
    put("Bot", "Botnet");
    put("FTP-Patator", "Brute Force");
    put("SSH-Patator", "Brute Force");
    put("DDoS", "DDoS");
    put("DoS GoldenEye", "DoS");
    put("DoS Hulk", "DoS");
    put("DoS Slowhttptest", "DoS");
    put("DoS slowloris", "DoS");
    put("DoS Slowloris", "DoS");
    put("Heartbleed", "DoS");
    put("PortScan", "Probe");
    put("Web Attack - Brute Force", "Web Attack");
    put("Web Attack - Sql Injection", "Web Attack");
    put("Web Attack - SQL Injection", "Web Attack");
    put("Web Attack - XSS", "Web Attack");
    put("Web Attack: Brute Force", "Web Attack");
    put("Web Attack: Sql Injection", "Web Attack");
    put("Web Attack: SQL Injection", "Web Attack");
    put("Web Attack: XSS", "Web Attack");
    put("Infiltration", "Infiltration");
    return g;
}

inline ClassGrouping identity_grouping(const CleanDataset& ds) {
    ClassGrouping g;
    for (const auto& c : ds.class_names) g.mapping.emplace(c, c);
    return g;
}

// ---------------------------------------------------------------------------
// CSV parsing
// ---------------------------------------------------------------------------

namespace detail {

// RFC-4180-style record reader: quoted fields, embedded commas/newlines,
// doubled quotes, CR/LF line ends. Returns false at end of input.
inline bool read_record(std::istream& is, std::vector<std::string>& fields, std::size_t& line_no) {
    fields.clear();
    int ci = is.get();
    if (ci == EOF) return false;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    while (true) {
        if (ci == EOF) {
            fields.push_back(field);
            return true;
        }
        char c = static_cast<char>(ci);
        any = true;
        if (in_quotes) {
            if (c == '"') {
                int peek = is.peek();
                if (peek == '"') {
                    field.push_back('"');
                    is.get();
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line_no;
                field.push_back(c);
            }
        } else if (c == '"' && field.empty()) {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\r') {
            // swallow; records end on LF
        } else if (c == '\n') {
            ++line_no;
            fields.push_back(std::move(field));
            return true;
        } else {
            field.push_back(c);
        }
        ci = is.get();
    }
    (void)any;
}

inline bool record_is_blank(const std::vector<std::string>& fields) {
    return fields.size() == 1 && trim(fields[0]).empty();
}

}  // namespace detail

// Parse one CSV file. Unparseable numeric cells are kept as invalid markers;
// only structural problems (missing file, missing label column, ragged rows)
// are errors here.
inline RawFlowTable load_csv(const std::filesystem::path& path, const std::string& label_column) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("missing input file: " + path.string());

    RawFlowTable t;
    t.label_column = label_column;

    // strip a UTF-8 byte-order mark so the first header cell parses clean
    char bom[3];
    is.read(bom, 3);
    if (!is || std::memcmp(bom, "\xEF\xBB\xBF", 3) != 0) {
        is.clear();
        is.seekg(0);
    }

    std::size_t line_no = 1;
    std::vector<std::string> fields;
    if (!detail::read_record(is, fields, line_no))
        throw DataError("empty file (no header): " + path.string());

    for (auto& f : fields) t.column_names.push_back(trim(f));
    auto label_it = std::find(t.column_names.begin(), t.column_names.end(), label_column);
    if (label_it == t.column_names.end())
        throw DataError("header of " + path.string() + " lacks label column '" + label_column + "'");
    t.label_index = static_cast<std::size_t>(label_it - t.column_names.begin());

    for (std::size_t i = 0; i < t.column_names.size(); ++i)
        if (i != t.label_index) t.feature_names.push_back(t.column_names[i]);

    const std::size_t n_cols = t.column_names.size();
    std::vector<double> flat;
    while (true) {
        std::size_t row_line = line_no;
        if (!detail::read_record(is, fields, line_no)) break;
        if (detail::record_is_blank(fields)) continue;
        if (fields.size() != n_cols)
            throw DataError(path.string() + ":" + std::to_string(row_line) +
                            ": row has " + std::to_string(fields.size()) +
                            " cells, header has " + std::to_string(n_cols));
        for (std::size_t i = 0; i < n_cols; ++i) {
            if (i == t.label_index) continue;
            flat.push_back(parse_cell(fields[i]));
        }
        t.labels.push_back(normalize_label(fields[t.label_index]));
    }

    t.cells.rows = t.labels.size();
    t.cells.cols = t.feature_names.size();
    t.cells.data = std::move(flat);
    return t;
}

// Drop feature columns by name (identity/address columns in some CSV
// variants would otherwise invalidate every row at the cleaning stage).
inline RawFlowTable drop_columns(RawFlowTable t, const std::vector<std::string>& names) {
    if (names.empty()) return t;
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < t.feature_names.size(); ++c)
        if (std::find(names.begin(), names.end(), t.feature_names[c]) == names.end())
            keep.push_back(c);
    if (keep.size() == t.feature_names.size()) return t;

    RawFlowTable out;
    out.label_column = t.label_column;
    std::vector<std::string> kept_names;
    for (std::size_t c : keep) kept_names.push_back(t.feature_names[c]);
    out.feature_names = kept_names;
    out.column_names = kept_names;
    out.column_names.push_back(t.label_column);
    out.label_index = kept_names.size();
    out.labels = std::move(t.labels);
    out.cells = take_cols(t.cells, keep);
    return out;
}

// Order-deterministic merge: tables concatenated in argument order. Headers
// must agree exactly.
inline RawFlowTable merge(std::vector<RawFlowTable> tables) {
    if (tables.empty()) throw DataError("no input files");
    RawFlowTable out = std::move(tables.front());
    for (std::size_t i = 1; i < tables.size(); ++i) {
        RawFlowTable& t = tables[i];
        if (t.column_names != out.column_names)
            throw DataError("input files have differing headers; cannot merge");
        out.cells.data.insert(out.cells.data.end(), t.cells.data.begin(), t.cells.data.end());
        out.cells.rows += t.cells.rows;
        out.labels.insert(out.labels.end(),
                          std::make_move_iterator(t.labels.begin()),
                          std::make_move_iterator(t.labels.end()));
    }
    return out;
}

// Parse every *.csv under dir (filename order) in parallel and merge.
inline RawFlowTable load_csv_dir(const std::filesystem::path& dir, const std::string& label_column) {
    namespace fs = std::filesystem;
    std::vector<fs::path> files;
    if (!fs::exists(dir)) throw DataError("no input files: " + dir.string());
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no input files in " + dir.string());

    std::vector<std::future<RawFlowTable>> jobs;
    jobs.reserve(files.size());
    for (const auto& f : files)
        jobs.push_back(std::async(std::launch::async, [f, label_column] {
            return load_csv(f, label_column);
        }));
    std::vector<RawFlowTable> tables;
    tables.reserve(files.size());
    for (auto& j : jobs) tables.push_back(j.get());
    return merge(std::move(tables));
}

// ---------------------------------------------------------------------------
// cleaning and regrouping
// ---------------------------------------------------------------------------

namespace detail {

inline void rebuild_class_table(CleanDataset& ds, const std::vector<std::string>& row_labels) {
    std::map<std::string, std::uint32_t> ids;
    for (const auto& l : row_labels) ids.emplace(l, 0);
    ds.class_names.clear();
    for (auto& [name, id] : ids) {
        id = static_cast<std::uint32_t>(ds.class_names.size());
        ds.class_names.push_back(name);
    }
    ds.labels.resize(row_labels.size());
    ds.class_counts.assign(ds.class_names.size(), 0);
    for (std::size_t i = 0; i < row_labels.size(); ++i) {
        std::uint32_t id = ids[row_labels[i]];
        ds.labels[i] = id;
        ++ds.class_counts[id];
    }
}

}  // namespace detail

// Keep exactly the rows whose feature cells are all finite. Surviving cells
// are copied bit-for-bit.
inline CleanDataset clean(const RawFlowTable& raw) {
    if (raw.n_rows() == 0) throw DataError("raw table is empty");
    const std::size_t d = raw.feature_names.size();

    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < raw.n_rows(); ++r) {
        const double* row = raw.cells.data.data() + r * d;
        bool ok = true;
        for (std::size_t c = 0; c < d; ++c) {
            if (!std::isfinite(row[c])) {
                ok = false;
                break;
            }
        }
        if (ok) keep.push_back(r);
    }
    if (keep.empty()) throw DataError("no rows survived cleaning");

    CleanDataset ds;
    ds.feature_names = raw.feature_names;
    ds.features = take_rows(raw.cells, keep);
    std::vector<std::string> row_labels;
    row_labels.reserve(keep.size());
    for (std::size_t r : keep) row_labels.push_back(raw.labels[r]);
    detail::rebuild_class_table(ds, row_labels);
    return ds;
}

// Replace labels by their general classes; features untouched, row order kept.
inline CleanDataset regroup_labels(const CleanDataset& ds, const ClassGrouping& grouping) {
    std::vector<std::string> row_labels;
    row_labels.reserve(ds.n_rows());
    for (std::size_t i = 0; i < ds.n_rows(); ++i)
        row_labels.push_back(grouping.general_class(ds.label_name(i)));

    CleanDataset out;
    out.feature_names = ds.feature_names;
    out.features = ds.features;
    detail::rebuild_class_table(out, row_labels);
    return out;
}

namespace detail {

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

}  // namespace detail

// CSV emission (header row, label column last); text fields quoted as needed.
inline void write_csv(const std::vector<std::string>& feature_names, const Matrix& rows,
                      const std::vector<std::string>& labels,
                      const std::filesystem::path& path,
                      const std::string& label_column = "Label") {
    if (rows.rows != labels.size()) throw DataError("write_csv: row/label count mismatch");
    atomic_write(path, [&](std::ostream& os) {
        for (const auto& f : feature_names) os << detail::csv_quote(f) << ",";
        os << detail::csv_quote(label_column) << "\n";
        for (std::size_t r = 0; r < rows.rows; ++r) {
            for (std::size_t c = 0; c < rows.cols; ++c) os << fmt_double(rows(r, c)) << ",";
            os << detail::csv_quote(labels[r]) << "\n";
        }
    });
}

inline void write_csv(const CleanDataset& ds, const std::filesystem::path& path,
                      const std::string& label_column = "Label") {
    std::vector<std::string> labels;
    labels.reserve(ds.n_rows());
    for (std::size_t r = 0; r < ds.n_rows(); ++r) labels.push_back(ds.label_name(r));
    write_csv(ds.feature_names, ds.features, labels, path, label_column);
}

// ---------------------------------------------------------------------------
// columnar binary cache
// ---------------------------------------------------------------------------
// Layout (all integers little-endian):
//   magic   8 bytes  "GIDSCOL\n"
//   version u32      1
//   n_rows  u64, n_features u32, n_classes u32
//   feature names, class names  (u32 length + bytes each)
//   labels  u32 * n_rows
//   columns n_features blocks of n_rows f64 (column-major)

inline constexpr char kCacheMagic[8] = {'G', 'I', 'D', 'S', 'C', 'O', 'L', '\n'};
inline constexpr std::uint32_t kCacheVersion = 1;

inline void save_cache(const CleanDataset& ds, const std::filesystem::path& path) {
    atomic_write(path, [&](std::ostream& os) {
        os.write(kCacheMagic, 8);
        detail::write_pod<std::uint32_t>(os, kCacheVersion);
        detail::write_pod<std::uint64_t>(os, ds.n_rows());
        detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(ds.n_features()));
        detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(ds.class_names.size()));
        for (const auto& f : ds.feature_names) detail::write_string(os, f);
        for (const auto& c : ds.class_names) detail::write_string(os, c);
        os.write(reinterpret_cast<const char*>(ds.labels.data()),
                 static_cast<std::streamsize>(ds.labels.size() * sizeof(std::uint32_t)));
        std::vector<double> col(ds.n_rows());
        for (std::size_t c = 0; c < ds.n_features(); ++c) {
            for (std::size_t r = 0; r < ds.n_rows(); ++r) col[r] = ds.features(r, c);
            detail::write_doubles(os, col.data(), col.size());
        }
    });
}

inline CleanDataset load_cache(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open cache: " + path.string());
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kCacheMagic, 8) != 0)
        throw DataError("not a dataset cache file: " + path.string());
    auto version = detail::read_pod<std::uint32_t>(is);
    if (version != kCacheVersion)
        throw DataError("unsupported cache version " + std::to_string(version));

    CleanDataset ds;
    auto n_rows = detail::read_pod<std::uint64_t>(is);
    auto n_features = detail::read_pod<std::uint32_t>(is);
    auto n_classes = detail::read_pod<std::uint32_t>(is);
    ds.feature_names.reserve(n_features);
    for (std::uint32_t i = 0; i < n_features; ++i) ds.feature_names.push_back(detail::read_string(is));
    ds.class_names.reserve(n_classes);
    for (std::uint32_t i = 0; i < n_classes; ++i) ds.class_names.push_back(detail::read_string(is));
    ds.labels.resize(n_rows);
    is.read(reinterpret_cast<char*>(ds.labels.data()),
            static_cast<std::streamsize>(n_rows * sizeof(std::uint32_t)));
    if (!is) throw DataError("truncated cache: " + path.string());
    ds.features = Matrix(n_rows, n_features);
    std::vector<double> col(n_rows);
    for (std::uint32_t c = 0; c < n_features; ++c) {
        detail::read_doubles(is, col.data(), n_rows);
        for (std::uint64_t r = 0; r < n_rows; ++r) ds.features(r, c) = col[r];
    }
    ds.class_counts.assign(n_classes, 0);
    for (auto l : ds.labels) {
        if (l >= n_classes) throw DataError("corrupt cache: label id out of range");
        ++ds.class_counts[l];
    }
    return ds;
}

}  // namespace ganids
