#include "ahmca/embedding.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "ahmca/random.hpp"
#include "ahmca/text.hpp"

namespace ahmca {

EmbeddingTable::EmbeddingTable(std::vector<std::string> tokens, MatrixD vectors,
                               std::optional<std::vector<double>> unk)
    : tokens_(std::move(tokens)), vectors_(std::move(vectors)) {
  if (vectors_.rows() != tokens_.size()) {
    throw Error(ErrorKind::DimMismatch, "embedding rows " + std::to_string(vectors_.rows()) +
                                            " != tokens " + std::to_string(tokens_.size()));
  }
  require_finite(vectors_, "embedding vectors");
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second) {
      throw Error(ErrorKind::DuplicateToken, "'" + tokens_[i] + "'");
    }
  }
  if (unk) {
    if (unk->size() != dim()) throw Error(ErrorKind::DimMismatch, "unk vector length");
    for (double v : *unk)
      if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "unk vector");
    unk_ = std::move(*unk);
  } else {
    unk_.assign(dim(), 0.0);
    for (std::size_t r = 0; r < vectors_.rows(); ++r)
      for (std::size_t j = 0; j < dim(); ++j) unk_[j] += vectors_(r, j);
    if (!tokens_.empty()) {
      for (double& v : unk_) v /= static_cast<double>(tokens_.size());
    }
  }
}

EmbeddingTable EmbeddingTable::random(std::vector<std::string> tokens, std::size_t dim,
                                      std::uint64_t seed) {
  Rng rng(seed);
  MatrixD vecs(tokens.size(), dim);
  for (std::size_t r = 0; r < tokens.size(); ++r) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (auto& v : vecs.row(r)) {
        v = rng.normal();
        norm += v * v;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (auto& v : vecs.row(r)) v /= norm;
  }
  return EmbeddingTable(std::move(tokens), std::move(vecs));
}

std::optional<std::size_t> EmbeddingTable::find(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t EmbeddingTable::index_or_unk(std::string_view token) const {
  return find(token).value_or(tokens_.size());
}

std::span<const double> EmbeddingTable::lookup(std::string_view token) const {
  if (const auto i = find(token)) return vectors_.row(*i);
  return unk_;
}

MatrixD EmbeddingTable::full_table() const {
  MatrixD out(size() + 1, dim());
  std::copy(vectors_.data().begin(), vectors_.data().end(), out.data().begin());
  std::copy(unk_.begin(), unk_.end(), out.row(size()).begin());
  return out;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_size(std::string_view s, std::size_t& out) {
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace

EmbeddingTable load_embeddings(std::string_view text) {
  std::size_t pos = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    const std::size_t nl = text.find('\n', pos);
    const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
    line = text.substr(pos, end - pos);
    pos = end + 1;
    return true;
  };

  std::string_view line;
  if (!next_line(line)) throw Error(ErrorKind::MalformedHeader, "empty input");
  const auto header = split_fields(line);
  std::size_t vocab = 0;
  std::size_t dim = 0;
  if (header.size() != 2 || !parse_size(header[0], vocab) || !parse_size(header[1], dim) ||
      dim == 0) {
    throw Error(ErrorKind::MalformedHeader, "expected \"vocab_size dim\", got \"" +
                                                std::string(line) + "\"");
  }

  std::vector<std::string> tokens;
  std::vector<double> data;
  tokens.reserve(vocab);
  data.reserve(vocab * dim);
  std::size_t line_no = 1;
  while (next_line(line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != dim + 1) {
      throw Error(ErrorKind::RowArity, "line " + std::to_string(line_no) + " has " +
                                           std::to_string(fields.size() - 1) +
                                           " components, expected " + std::to_string(dim));
    }
    if (tokens.size() == vocab) {
      throw Error(ErrorKind::CountMismatch, "more than " + std::to_string(vocab) + " rows");
    }
    tokens.emplace_back(fields[0]);
    for (std::size_t j = 1; j <= dim; ++j) {
      double v = 0.0;
      if (!parse_double(fields[j], v)) {
        throw Error(ErrorKind::RowArity, "line " + std::to_string(line_no) +
                                             ": non-numeric component '" +
                                             std::string(fields[j]) + "'");
      }
      data.push_back(v);
    }
  }
  if (tokens.size() != vocab) {
    throw Error(ErrorKind::CountMismatch, "header promises " + std::to_string(vocab) +
                                              " rows, found " + std::to_string(tokens.size()));
  }
  const std::size_t n = tokens.size();
  return EmbeddingTable(std::move(tokens), MatrixD(n, dim, std::move(data)));
}

std::string write_embeddings(const EmbeddingTable& table) {
  std::string out = std::to_string(table.size()) + " " + std::to_string(table.dim()) + "\n";
  char buf[32];
  for (std::size_t r = 0; r < table.size(); ++r) {
    out += table.tokens()[r];
    for (const double v : table.vectors().row(r)) {
      std::snprintf(buf, sizeof buf, " %.17g", v);
      out += buf;
    }
    out.push_back('\n');
  }
  return out;
}

MatrixD embed_sequence(std::span<const std::string> tokens, const EmbeddingTable& table) {
  if (tokens.empty()) throw Error(ErrorKind::EmptyInput, "embed_sequence: no tokens");
  MatrixD out(tokens.size(), table.dim());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto v = table.lookup(tokens[i]);
    std::copy(v.begin(), v.end(), out.row(i).begin());
  }
  return out;
}

std::vector<std::size_t> phrase_rows(std::string_view phrase, const EmbeddingTable& table) {
  std::vector<std::size_t> rows;
  for (const auto& w : tokenize(phrase)) rows.push_back(table.index_or_unk(w));
  return rows;
}

std::vector<std::size_t> keyword_rows(std::string_view keyword, const EmbeddingTable& table) {
  std::vector<std::size_t> rows;
  std::size_t i = 0;
  while (i < keyword.size()) {
    while (i < keyword.size() && keyword[i] == ' ') ++i;
    std::size_t j = i;
    while (j < keyword.size() && keyword[j] != ' ') ++j;
    if (j > i) rows.push_back(table.index_or_unk(keyword.substr(i, j - i)));
    i = j;
  }
  return rows;
}

std::vector<std::vector<std::size_t>> label_rows(const Taxonomy& taxonomy, int level,
                                                 const EmbeddingTable& table) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& id : taxonomy.labels_at_level(level)) {
    auto rows = phrase_rows(taxonomy.label(id).text, table);
    if (rows.empty()) throw Error(ErrorKind::EmptyLabelText, "label '" + id + "'");
    out.push_back(std::move(rows));
  }
  return out;
}

namespace {

MatrixD mean_rows(const std::vector<std::vector<std::size_t>>& segments, const MatrixD& full) {
  MatrixD out(segments.size(), full.cols());
  for (std::size_t s = 0; s < segments.size(); ++s) {
    auto row = out.row(s);
    for (const std::size_t r : segments[s]) {
      const auto src = full.row(r);
      for (std::size_t j = 0; j < row.size(); ++j) row[j] += src[j];
    }
    for (auto& v : row) v /= static_cast<double>(segments[s].size());
  }
  return out;
}

}  // namespace

LabelMatrices build_label_matrices(const Taxonomy& taxonomy, const EmbeddingTable& table) {
  const MatrixD full = table.full_table();
  LabelMatrices out;
  for (int level = 1; level <= static_cast<int>(taxonomy.depth()); ++level) {
    out.levels.push_back(mean_rows(label_rows(taxonomy, level, table), full));
  }
  return out;
}

MatrixD keyword_matrix(std::span<const std::string> keywords, const EmbeddingTable& table) {
  std::vector<std::vector<std::size_t>> segments;
  for (const auto& kw : keywords) {
    auto rows = keyword_rows(kw, table);
    if (!rows.empty()) segments.push_back(std::move(rows));
  }
  return mean_rows(segments, table.full_table());
}

}  // namespace ahmca
