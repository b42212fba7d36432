#include "topogen/embedding.hpp"

#include <cctype>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "topogen/rng.hpp"

namespace topogen {

std::string require_nonempty_text(const std::string& text) {
    size_t b = 0, e = text.size();
    while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
    if (b == e) throw InputError("embedding: empty text");
    return text.substr(b, e - b);
}

void l2_normalize(nd::Array& v) {
    double norm = 0.0;
    for (size_t i = 0; i < v.size(); ++i) norm += static_cast<double>(v[i]) * v[i];
    norm = std::sqrt(norm);
    if (norm == 0.0) return;
    for (size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(v[i] / norm);
}

HashedEmbedding::HashedEmbedding(int dim) : dim_(dim) {
    if (dim < 1) throw InputError("HashedEmbedding: dimension must be positive");
}

nd::Array HashedEmbedding::embed(const std::string& text) const {
    std::string trimmed = require_nonempty_text(text);

    nd::Array v({dim_});
    auto bucket = [&](const std::string& token) {
        uint64_t h = fnv1a64(token);
        size_t idx = static_cast<size_t>(h % static_cast<uint64_t>(dim_));
        float sign = ((h >> 32) & 1u) ? 1.0f : -1.0f;
        v[idx] += sign;
    };

    std::string token;
    bool any = false;
    for (char ch : trimmed) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            token.push_back(static_cast<char>(std::tolower(c)));
        } else if (!token.empty()) {
            bucket(token);
            token.clear();
            any = true;
        }
    }
    if (!token.empty()) {
        bucket(token);
        any = true;
    }
    // text with no alphanumeric runs hashes as a single opaque token
    if (!any) bucket(trimmed);

    l2_normalize(v);
    return v;
}

FileEmbedding FileEmbedding::load(const std::string& path, int dim) {
    std::ifstream in(path);
    if (!in) throw IoError("FileEmbedding: cannot open " + path);
    std::map<std::string, nd::Array> table;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("text") || !j.contains("embedding"))
            throw ValidationError("FileEmbedding: bad record at " + path + ":" +
                                  std::to_string(lineno));
        std::vector<float> data = j["embedding"].get<std::vector<float>>();
        if (static_cast<int>(data.size()) != dim)
            throw DimensionError("FileEmbedding: embedding length " +
                                 std::to_string(data.size()) + " != " + std::to_string(dim) +
                                 " at line " + std::to_string(lineno));
        nd::Array v({dim}, std::move(data));
        l2_normalize(v);
        table[j["text"].get<std::string>()] = std::move(v);
    }
    return FileEmbedding(dim, std::move(table));
}

nd::Array FileEmbedding::embed(const std::string& text) const {
    require_nonempty_text(text);
    auto it = table_.find(text);
    if (it == table_.end()) throw LookupError("FileEmbedding: no embedding for text: " + text);
    return it->second;
}

}  // namespace topogen
