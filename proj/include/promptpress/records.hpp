#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "promptpress/corpus.hpp"
#include "promptpress/errors.hpp"

namespace promptpress {

using json = nlohmann::json;

// Line-delimited record files: one JSON object per line, UTF-8. Known
// fields are parsed into the typed structs below; unknown fields ride along
// in `extra` and are written back verbatim, so foreign annotations survive a
// read/write cycle.

namespace detail {

inline json take_field(json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw SchemaError(std::string("missing field \"") + key + "\"");
    }
    json v = std::move(*it);
    j.erase(it);
    return v;
}

inline std::string take_string(json& j, const char* key) {
    json v = take_field(j, key);
    if (!v.is_string()) throw SchemaError(std::string("field \"") + key + "\" must be a string");
    return v.get<std::string>();
}

inline double take_double(json& j, const char* key) {
    json v = take_field(j, key);
    if (!v.is_number()) throw SchemaError(std::string("field \"") + key + "\" must be a number");
    return v.get<double>();
}

inline bool take_bool(json& j, const char* key) {
    json v = take_field(j, key);
    if (!v.is_boolean()) throw SchemaError(std::string("field \"") + key + "\" must be a boolean");
    return v.get<bool>();
}

// Ratios may be infinite (a document compressed to zero words); JSON has no
// inf literal, so non-finite values are stored as null.
inline void put_ratio(json& j, const char* key, double value) {
    if (std::isfinite(value)) {
        j[key] = value;
    } else {
        j[key] = nullptr;
    }
}

inline double take_ratio(json& j, const char* key) {
    json v = take_field(j, key);
    if (v.is_null()) return std::numeric_limits<double>::infinity();
    if (!v.is_number()) throw SchemaError(std::string("field \"") + key + "\" must be a number or null");
    return v.get<double>();
}

}  // namespace detail

/// Pipeline input: a raw document.
struct DocRecord {
    std::string doc_id;
    std::string text;
    json extra = json::object();

    static DocRecord from_json(json j) {
        DocRecord r;
        r.doc_id = detail::take_string(j, "doc_id");
        r.text = detail::take_string(j, "text");
        r.extra = std::move(j);
        return r;
    }
    json to_json() const {
        json j = extra;
        j["doc_id"] = doc_id;
        j["text"] = text;
        return j;
    }
};

/// Distillation output: {"doc_id","original","compressed","chunk_boundaries"}.
struct PairRecord {
    DistilledPair pair;
    json extra = json::object();

    static PairRecord from_json(json j) {
        PairRecord r;
        r.pair.doc_id = detail::take_string(j, "doc_id");
        r.pair.original = detail::take_string(j, "original");
        r.pair.compressed = detail::take_string(j, "compressed");
        json b = detail::take_field(j, "chunk_boundaries");
        if (!b.is_array()) throw SchemaError("field \"chunk_boundaries\" must be an array");
        for (const auto& v : b) {
            if (!v.is_number_unsigned() && !v.is_number_integer()) {
                throw SchemaError("chunk_boundaries entries must be non-negative integers");
            }
            r.pair.chunk_boundaries.push_back(v.get<std::size_t>());
        }
        r.extra = std::move(j);
        return r;
    }
    json to_json() const {
        json j = extra;
        j["doc_id"] = pair.doc_id;
        j["original"] = pair.original;
        j["compressed"] = pair.compressed;
        j["chunk_boundaries"] = pair.chunk_boundaries;
        return j;
    }
};

/// Annotation output: {"doc_id","words":[...],"labels":[0/1,...]}.
struct AnnotationRecord {
    std::string doc_id;
    std::vector<std::string> words;
    std::vector<bool> labels;
    json extra = json::object();

    static AnnotationRecord from_json(json j) {
        AnnotationRecord r;
        r.doc_id = detail::take_string(j, "doc_id");
        json w = detail::take_field(j, "words");
        if (!w.is_array()) throw SchemaError("field \"words\" must be an array");
        for (const auto& v : w) {
            if (!v.is_string()) throw SchemaError("words entries must be strings");
            r.words.push_back(v.get<std::string>());
        }
        json l = detail::take_field(j, "labels");
        if (!l.is_array()) throw SchemaError("field \"labels\" must be an array");
        for (const auto& v : l) {
            if (v.is_boolean()) {
                r.labels.push_back(v.get<bool>());
            } else if (v.is_number_integer() || v.is_number_unsigned()) {
                auto n = v.get<long long>();
                if (n != 0 && n != 1) throw SchemaError("labels entries must be 0 or 1");
                r.labels.push_back(n == 1);
            } else {
                throw SchemaError("labels entries must be 0 or 1");
            }
        }
        if (r.labels.size() != r.words.size()) {
            throw SchemaError("labels length " + std::to_string(r.labels.size()) +
                              " does not match word count " + std::to_string(r.words.size()) +
                              " (doc_id " + r.doc_id + ")");
        }
        r.extra = std::move(j);
        return r;
    }
    json to_json() const {
        json j = extra;
        j["doc_id"] = doc_id;
        j["words"] = words;
        json l = json::array();
        for (bool b : labels) l.push_back(b ? 1 : 0);
        j["labels"] = std::move(l);
        return j;
    }
};

/// Per-token (or per-word) preserve probabilities. When "subword_map" is
/// present, probs are subword-level and each inner array lists the subword
/// indices owned by one word, in word order.
struct ScoreRecord {
    std::string doc_id;
    std::vector<double> probs;
    std::optional<std::vector<std::vector<std::size_t>>> subword_map;
    json extra = json::object();

    static ScoreRecord from_json(json j) {
        ScoreRecord r;
        r.doc_id = detail::take_string(j, "doc_id");
        json p = detail::take_field(j, "probs");
        if (!p.is_array()) throw SchemaError("field \"probs\" must be an array");
        for (const auto& v : p) {
            if (!v.is_number()) throw SchemaError("probs entries must be numbers");
            r.probs.push_back(v.get<double>());
        }
        if (auto it = j.find("subword_map"); it != j.end()) {
            if (!it->is_array()) throw SchemaError("field \"subword_map\" must be an array of arrays");
            std::vector<std::vector<std::size_t>> map;
            for (const auto& group : *it) {
                if (!group.is_array()) throw SchemaError("subword_map entries must be arrays");
                std::vector<std::size_t> g;
                for (const auto& v : group) {
                    if (!v.is_number_unsigned() && !v.is_number_integer()) {
                        throw SchemaError("subword_map indices must be non-negative integers");
                    }
                    g.push_back(v.get<std::size_t>());
                }
                map.push_back(std::move(g));
            }
            r.subword_map = std::move(map);
            j.erase(it);
        }
        r.extra = std::move(j);
        return r;
    }
    json to_json() const {
        json j = extra;
        j["doc_id"] = doc_id;
        j["probs"] = probs;
        if (subword_map) j["subword_map"] = *subword_map;
        return j;
    }
};

/// Quality-control report: {"doc_id","vr","mr","hr","ag","kept"}.
struct QualityRecord {
    std::string doc_id;
    double vr = 0.0;
    double mr = 0.0;
    double hr = 0.0;
    double ag = 0.0;
    bool kept = true;
    json extra = json::object();

    static QualityRecord from_json(json j) {
        QualityRecord r;
        r.doc_id = detail::take_string(j, "doc_id");
        r.vr = detail::take_double(j, "vr");
        r.mr = detail::take_double(j, "mr");
        r.hr = detail::take_double(j, "hr");
        r.ag = detail::take_double(j, "ag");
        r.kept = detail::take_bool(j, "kept");
        r.extra = std::move(j);
        return r;
    }
    json to_json() const {
        json j = extra;
        j["doc_id"] = doc_id;
        j["vr"] = vr;
        j["mr"] = mr;
        j["hr"] = hr;
        j["ag"] = ag;
        j["kept"] = kept;
        return j;
    }
};

/// Compression output: {"doc_id","kept_indices","compressed","achieved_ratio"}.
struct ResultRecord {
    std::string doc_id;
    std::vector<std::size_t> kept_indices;
    std::string compressed;
    double achieved_ratio = 1.0;
    json extra = json::object();

    static ResultRecord from_json(json j) {
        ResultRecord r;
        r.doc_id = detail::take_string(j, "doc_id");
        json k = detail::take_field(j, "kept_indices");
        if (!k.is_array()) throw SchemaError("field \"kept_indices\" must be an array");
        for (const auto& v : k) {
            if (!v.is_number_unsigned() && !v.is_number_integer()) {
                throw SchemaError("kept_indices entries must be non-negative integers");
            }
            r.kept_indices.push_back(v.get<std::size_t>());
        }
        r.compressed = detail::take_string(j, "compressed");
        r.achieved_ratio = detail::take_ratio(j, "achieved_ratio");
        r.extra = std::move(j);
        return r;
    }
    json to_json() const {
        json j = extra;
        j["doc_id"] = doc_id;
        j["kept_indices"] = kept_indices;
        j["compressed"] = compressed;
        detail::put_ratio(j, "achieved_ratio", achieved_ratio);
        return j;
    }
};

/// Read a line-delimited record file. Malformed lines raise SchemaError
/// naming the 1-based line number; whitespace-only lines are skipped.
template <typename R>
std::vector<R> read_records(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open input file: " + path.string());
    std::vector<R> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw SchemaError(path.string() + " line " + std::to_string(lineno) +
                              ": invalid record: " + e.what());
        }
        if (!j.is_object()) {
            throw SchemaError(path.string() + " line " + std::to_string(lineno) +
                              ": record must be a JSON object");
        }
        try {
            out.push_back(R::from_json(std::move(j)));
        } catch (const SchemaError& e) {
            throw SchemaError(path.string() + " line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

template <typename R>
void write_records(const std::vector<R>& records, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot open output file: " + path.string());
    for (const auto& r : records) {
        out << r.to_json().dump() << '\n';
    }
    if (!out) throw FileError("failed while writing: " + path.string());
}

}  // namespace promptpress
