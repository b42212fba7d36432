#pragma once

#include <map>
#include <memory>
#include <string>

#include "topogen/array.hpp"

namespace topogen {

// Maps text to a unit-L2 vector of fixed dimension. Implementations must be
// pure functions of the input text.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual int raw_dim() const = 0;
    virtual nd::Array embed(const std::string& text) const = 0;
};

// Default provider: signed feature hashing over lowercase word tokens,
// L2-normalized. Deterministic and dependency-free; stands in for a
// sentence encoder while keeping the encode-then-project pipeline shape.
class HashedEmbedding : public EmbeddingProvider {
public:
    explicit HashedEmbedding(int dim = 384);
    int raw_dim() const override { return dim_; }
    nd::Array embed(const std::string& text) const override;

private:
    int dim_;
};

// File-backed provider: exact-text lookup into embeddings computed
// externally (e.g. by a real sentence encoder). JSON Lines, one
// {"text": ..., "embedding": [...]} object per line.
class FileEmbedding : public EmbeddingProvider {
public:
    static FileEmbedding load(const std::string& path, int dim);
    int raw_dim() const override { return dim_; }
    nd::Array embed(const std::string& text) const override;

    size_t entry_count() const { return table_.size(); }

private:
    FileEmbedding(int dim, std::map<std::string, nd::Array> table)
        : dim_(dim), table_(std::move(table)) {}

    int dim_;
    std::map<std::string, nd::Array> table_;
};

// Trims whitespace; throws InputError if nothing remains.
std::string require_nonempty_text(const std::string& text);

void l2_normalize(nd::Array& v);

}  // namespace topogen
