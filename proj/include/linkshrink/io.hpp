#pragma once

// Plain-text ingestion and output: delimiter-separated data with a header
// row, key-value schema files, and the posterior draw dump.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "linkshrink/design.hpp"
#include "linkshrink/errors.hpp"
#include "linkshrink/model.hpp"
#include "linkshrink/sampler.hpp"

namespace linkshrink {

struct Schema {
    std::vector<std::pair<std::string, ColumnKind>> columns;  // file order
    std::string response;
};

inline ColumnKind parse_column_kind(std::string_view s) {
    if (s == "continuous") return ColumnKind::continuous;
    if (s == "binary") return ColumnKind::binary;
    if (s == "categorical") return ColumnKind::categorical;
    throw DataError("unknown column kind '" + std::string(s) + "' (valid: continuous, binary, categorical)");
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(std::string_view line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

inline std::ifstream open_input(const std::filesystem::path& path, std::string_view what) {
    if (!std::filesystem::exists(path)) throw DataError(std::string(what) + " not found: " + path.string());
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + std::string(what) + ": " + path.string());
    return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

}  // namespace detail

/// Lines `name = kind` plus an optional `response = column`. '#' starts a comment.
inline Schema parse_schema(std::string_view text) {
    Schema schema;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw DataError("schema line " + std::to_string(line_no) + ": expected 'name = kind'");
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string value(detail::trim(line.substr(eq + 1)));
        if (key.empty() || value.empty())
            throw DataError("schema line " + std::to_string(line_no) + ": empty name or value");
        if (key == "response") {
            schema.response = value;
            continue;
        }
        for (const auto& [name, kind] : schema.columns)
            if (name == key) throw DataError("schema declares column '" + key + "' twice");
        schema.columns.emplace_back(key, parse_column_kind(value));
    }
    if (schema.columns.empty()) throw DataError("schema declares no covariates");
    return schema;
}

inline Schema read_schema(const std::filesystem::path& path) {
    auto in = detail::open_input(path, "schema file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_schema(ss.str());
}

inline std::string format_schema(const Schema& schema) {
    std::string out;
    for (const auto& [name, kind] : schema.columns) out += name + " = " + std::string(to_string(kind)) + "\n";
    if (!schema.response.empty()) out += "response = " + schema.response + "\n";
    return out;
}

/// Tab if the header contains one, otherwise comma.
inline char detect_delimiter(std::string_view header) { return header.find('\t') != std::string_view::npos ? '\t' : ','; }

/// Parses delimited text with a header row. Columns absent from the schema
/// are ignored. The response is read when `response` is non-empty and
/// `require_response` is set, or when the column is present.
inline RawDataset parse_dataset(std::string_view text, const Schema& schema, const std::string& response,
                                bool require_response, std::string_view source = "input") {
    std::istringstream in{std::string(text)};
    std::string header_line;
    while (std::getline(in, header_line) && detail::trim(header_line).empty()) {
    }
    if (detail::trim(header_line).empty()) throw DataError(std::string(source) + ": empty file");
    const char delim = detect_delimiter(header_line);
    const auto header = detail::split(header_line, delim);
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i].empty()) throw DataError(std::string(source) + ": empty column name in header");
        if (!position.emplace(header[i], i).second)
            throw DataError(std::string(source) + ": duplicate column '" + header[i] + "'");
    }

    RawDataset data;
    data.response_name = response;
    std::vector<std::size_t> where;
    for (const auto& [name, kind] : schema.columns) {
        if (name == response) throw DataError("response column '" + name + "' is also declared as a covariate");
        const auto it = position.find(name);
        if (it == position.end()) throw DataError(std::string(source) + ": missing column '" + name + "'");
        data.columns.push_back({name, kind, {}, {}});
        where.push_back(it->second);
    }
    std::optional<std::size_t> response_pos;
    if (!response.empty()) {
        const auto it = position.find(response);
        if (it != position.end()) response_pos = it->second;
        else if (require_response) throw DataError(std::string(source) + ": missing response column '" + response + "'");
    }

    std::string raw;
    std::size_t line_no = 1;
    while (std::getline(in, raw)) {
        ++line_no;
        if (detail::trim(raw).empty()) continue;
        const auto cells = detail::split(raw, delim);
        if (cells.size() != header.size())
            throw DataError(std::string(source) + " line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, found " + std::to_string(cells.size()));
        for (std::size_t c = 0; c < data.columns.size(); ++c) {
            auto& col = data.columns[c];
            const std::string& cell = cells[where[c]];
            if (cell.empty() || cell == "NA")
                throw DataError(std::string(source) + " line " + std::to_string(line_no) + ": missing value in '" +
                                col.name + "'");
            if (col.kind == ColumnKind::continuous) {
                const auto v = detail::parse_double(cell);
                if (!v || !std::isfinite(*v))
                    throw DataError(std::string(source) + " line " + std::to_string(line_no) + ": '" + cell +
                                    "' is not a finite number in '" + col.name + "'");
                col.numeric.push_back(*v);
            } else {
                col.labels.push_back(cell);
            }
        }
        if (response_pos) {
            const auto v = detail::parse_double(cells[*response_pos]);
            if (!v || !std::isfinite(*v))
                throw DataError(std::string(source) + " line " + std::to_string(line_no) + ": response '" +
                                cells[*response_pos] + "' is not a finite number");
            data.response.push_back(*v);
        }
    }
    if (data.n_rows() == 0) throw DataError(std::string(source) + ": no data rows");
    return data;
}

inline RawDataset read_dataset(const std::filesystem::path& path, const Schema& schema, const std::string& response,
                               bool require_response) {
    auto in = detail::open_input(path, "data file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_dataset(ss.str(), schema, response, require_response, path.string());
}

/// Shortest representation that round-trips exactly.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

/// Tab-separated data file with the response as the last column.
inline void write_dataset(const std::filesystem::path& path, const RawDataset& data) {
    data.validate();
    auto out = detail::open_output(path);
    for (const auto& c : data.columns) out << c.name << '\t';
    out << data.response_name << '\n';
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        for (const auto& c : data.columns)
            out << (c.kind == ColumnKind::continuous ? format_double(c.numeric[i]) : c.labels[i]) << '\t';
        out << (data.response.empty() ? std::string("NA") : format_double(data.response[i])) << '\n';
    }
}

inline Schema schema_of(const RawDataset& data) {
    Schema s;
    for (const auto& c : data.columns) s.columns.emplace_back(c.name, c.kind);
    s.response = data.response_name;
    return s;
}

/// One row per retained draw: chain, draw, then parameter_names().
inline void write_draws(const std::filesystem::path& path, const PosteriorDraws& draws) {
    auto out = detail::open_output(path);
    out << "chain\tdraw";
    for (const auto& n : draws.parameter_names()) out << '\t' << n;
    out << '\n';
    for (std::size_t d = 0; d < draws.size(); ++d) {
        out << draws.chain_ids[d] << '\t' << draws.draw_index[d];
        const Eigen::VectorXd v = PosteriorDraws::flatten(draws.states[d]);
        for (Eigen::Index k = 0; k < v.size(); ++k) out << '\t' << format_double(v(k));
        out << '\n';
    }
}

/// Reads a dump written by write_draws for the given feature map. The
/// variant is taken from `spec`, except that per-interaction scales imply Bayloc.
inline PosteriorDraws read_draws(const std::filesystem::path& path, std::shared_ptr<const FeatureMap> map, ModelSpec spec) {
    auto in = detail::open_input(path, "draw file");
    std::string header_line;
    if (!std::getline(in, header_line)) throw DataError(path.string() + ": empty draw file");
    const auto header = detail::split(header_line, detect_delimiter(header_line));
    const std::size_t p = map->p_columns();
    const std::size_t q = map->q();
    if (q > 0 && header.size() == 2 + 1 + 2 * (p + q) + 2) spec.variant = Variant::bayloc;

    PosteriorDraws draws;
    draws.spec = spec;
    draws.map = map;
    const auto expected = draws.parameter_names();
    if (header.size() != expected.size() + 2 || header[0] != "chain" || header[1] != "draw")
        throw DataError(path.string() + ": header does not match the model's parameters");
    for (std::size_t k = 0; k < expected.size(); ++k)
        if (header[k + 2] != expected[k])
            throw DataError(path.string() + ": expected column '" + expected[k] + "', found '" + header[k + 2] + "'");
    const std::size_t n_tau = tau_count(spec.variant, p, q);
    const char delim = detect_delimiter(header_line);
    std::string raw;
    std::size_t line_no = 1;
    std::size_t max_chain = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (detail::trim(raw).empty()) continue;
        const auto cells = detail::split(raw, delim);
        if (cells.size() != header.size())
            throw DataError(path.string() + " line " + std::to_string(line_no) + ": wrong number of fields");
        std::vector<double> v(cells.size());
        for (std::size_t k = 0; k < cells.size(); ++k) {
            const auto x = detail::parse_double(cells[k]);
            if (!x) throw DataError(path.string() + " line " + std::to_string(line_no) + ": bad number '" + cells[k] + "'");
            v[k] = *x;
        }
        ModelState s;
        std::size_t at = 2;
        s.alpha = v[at++];
        s.beta_main.resize(static_cast<Eigen::Index>(p));
        for (std::size_t j = 0; j < p; ++j) s.beta_main(static_cast<Eigen::Index>(j)) = v[at++];
        s.beta_int.resize(static_cast<Eigen::Index>(q));
        for (std::size_t r = 0; r < q; ++r) s.beta_int(static_cast<Eigen::Index>(r)) = v[at++];
        s.tau.resize(static_cast<Eigen::Index>(n_tau));
        for (std::size_t j = 0; j < n_tau; ++j) s.tau(static_cast<Eigen::Index>(j)) = v[at++];
        s.tau_int = v[at++];
        s.sigma2 = v[at++];
        const auto chain = static_cast<std::size_t>(v[0]);
        max_chain = std::max(max_chain, chain);
        draws.chain_ids.push_back(chain);
        draws.draw_index.push_back(static_cast<std::size_t>(v[1]));
        draws.states.push_back(std::move(s));
    }
    if (draws.empty()) throw DataError(path.string() + ": no draws");
    draws.n_chains = max_chain + 1;
    return draws;
}

}  // namespace linkshrink
