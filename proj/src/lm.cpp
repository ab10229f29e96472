#include <trieguide/errors.hpp>
#include <trieguide/lm.hpp>
#include <trieguide/util.hpp>

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include <fmt/format.h>

namespace trieguide {

Distribution softmax(const vector_t& logits) {
  const scalar_t top = logits.maxCoeff();
  Distribution p = (logits.array() - top).exp().matrix();
  p /= p.sum();
  return p;
}

bool is_distribution(const Distribution& p, double tol) {
  if (p.size() == 0 || !p.allFinite() || (p.array() < 0).any()) return false;
  return std::abs(p.sum() - 1.0) <= tol;
}

// ---------------------------------------------------------------------------------------------
// n-gram

NgramScorer NgramScorer::fit(std::span<const TokenSeq> corpus, std::size_t vocab_size, int order, double alpha) {
  if (order < 1) throw InvalidArgument("n-gram order must be >= 1");
  if (!(alpha > 0) || !std::isfinite(alpha)) throw InvalidArgument("n-gram smoothing alpha must be positive");
  if (corpus.empty()) throw InvalidArgument("n-gram corpus is empty");

  NgramScorer scorer(vocab_size + 1, order, alpha);
  const auto eos = static_cast<TokenId>(vocab_size);
  const auto history = static_cast<std::size_t>(order - 1);
  for (const auto& seq : corpus) {
    TokenSeq padded(history, kStart);
    for (TokenId t : seq) {
      if (t < 0 || static_cast<std::size_t>(t) >= vocab_size) {
        throw InvalidArgument(fmt::format("token id {} out of range for vocabulary of size {}", t, vocab_size));
      }
      padded.push_back(t);
    }
    padded.push_back(eos);
    for (std::size_t i = history; i < padded.size(); ++i) {
      TokenSeq key(padded.begin() + static_cast<std::ptrdiff_t>(i - history), padded.begin() + static_cast<std::ptrdiff_t>(i));
      auto& c = scorer.counts_[std::move(key)];
      if (c.next.empty()) c.next.assign(scorer.symbols_, 0.0);
      c.next[static_cast<std::size_t>(padded[i])] += 1;
      c.total += 1;
    }
  }
  return scorer;
}

TokenSeq NgramScorer::key_for(std::span<const TokenId> context) const {
  const auto history = static_cast<std::size_t>(order_ - 1);
  TokenSeq key(history, kStart);
  const std::size_t take = std::min(history, context.size());
  std::copy(context.end() - static_cast<std::ptrdiff_t>(take), context.end(), key.end() - static_cast<std::ptrdiff_t>(take));
  return key;
}

Distribution NgramScorer::score(std::span<const TokenId> context, const PromptContext&) const {
  const auto denom_extra = alpha_ * static_cast<double>(symbols_);
  Distribution p(static_cast<Eigen::Index>(symbols_));
  const auto it = counts_.find(key_for(context));
  if (it == counts_.end()) {
    p.setConstant(1.0 / static_cast<double>(symbols_));
    return p;
  }
  const auto& c = it->second;
  for (std::size_t j = 0; j < symbols_; ++j) {
    p[static_cast<Eigen::Index>(j)] = (c.next[j] + alpha_) / (c.total + denom_extra);
  }
  return p;
}

// ---------------------------------------------------------------------------------------------
// TinyLm

TinyLm zero_tiny_lm(std::size_t symbols, int dim, int order) {
  if (symbols < 1) throw InvalidArgument("model needs at least the end-of-sequence symbol");
  if (dim < 1) throw InvalidArgument("model dimension must be >= 1");
  if (order < 0) throw InvalidArgument("context order must be >= 0");
  const auto s = static_cast<Eigen::Index>(symbols);
  TinyLm m;
  m.order = order;
  m.embedding = matrix_t::Zero(s, dim);
  m.output = matrix_t::Zero(dim, s);
  m.bias = vector_t::Zero(s);
  return m;
}

TinyLm random_tiny_lm(std::size_t symbols, int dim, int order, std::uint64_t seed, double scale) {
  TinyLm m = zero_tiny_lm(symbols, dim, order);
  std::mt19937_64 rng(seed);
  std::normal_distribution<scalar_t> normal(0.0, scale);
  auto fill = [&](auto& mat) {
    for (Eigen::Index i = 0; i < mat.size(); ++i) mat.data()[i] = normal(rng);
  };
  fill(m.embedding);
  fill(m.output);
  fill(m.bias);
  return m;
}

TinyLmGradient TinyLmGradient::zeros_like(const TinyLm& m) {
  return {matrix_t::Zero(m.embedding.rows(), m.embedding.cols()), matrix_t::Zero(m.output.rows(), m.output.cols()),
          vector_t::Zero(m.bias.size())};
}

TinyLmGradient& TinyLmGradient::operator+=(const TinyLmGradient& other) {
  embedding += other.embedding;
  output += other.output;
  bias += other.bias;
  return *this;
}

TinyLmGradient& TinyLmGradient::operator*=(scalar_t s) {
  embedding *= s;
  output *= s;
  bias *= s;
  return *this;
}

vector_t pool_prompt(const TinyLm& m, const PromptContext& prompt) {
  vector_t pooled = vector_t::Zero(m.dim());
  if (prompt.item_tokens.empty()) return pooled;
  for (TokenId t : prompt.item_tokens) pooled += m.embedding.row(t).transpose();
  pooled /= static_cast<scalar_t>(prompt.item_tokens.size());
  return pooled;
}

namespace {

void check_ids(const TinyLm& m, std::span<const TokenId> ids, const char* what) {
  for (TokenId t : ids) {
    if (t < 0 || static_cast<std::size_t>(t) >= m.symbols()) {
      throw InvalidArgument(fmt::format("{} token id {} out of range for {} symbols", what, t, m.symbols()));
    }
  }
}

}  // namespace

ForwardPass tiny_forward_pooled(const TinyLm& m, std::span<const TokenId> context, const PromptContext& prompt,
                                const vector_t& pooled_prompt) {
  ForwardPass fwd;
  const std::size_t take = std::min(context.size(), static_cast<std::size_t>(m.order));
  fwd.window.assign(context.end() - static_cast<std::ptrdiff_t>(take), context.end());
  fwd.has_prompt = !prompt.item_tokens.empty();

  fwd.hidden = vector_t::Zero(m.dim());
  const std::size_t elements = fwd.window.size() + (fwd.has_prompt ? 1 : 0);
  if (elements > 0) {
    if (fwd.has_prompt) fwd.hidden += pooled_prompt;
    for (TokenId t : fwd.window) fwd.hidden += m.embedding.row(t).transpose();
    fwd.hidden /= static_cast<scalar_t>(elements);
  }
  fwd.logits = m.output.transpose() * fwd.hidden + m.bias;
  fwd.probs = softmax(fwd.logits);
  return fwd;
}

ForwardPass tiny_forward(const TinyLm& m, std::span<const TokenId> context, const PromptContext& prompt) {
  if (!m.all_finite()) throw InvalidArgument("model has non-finite parameters");
  check_ids(m, context, "context");
  check_ids(m, prompt.item_tokens, "prompt");
  return tiny_forward_pooled(m, context, prompt, pool_prompt(m, prompt));
}

void backprop_position(const TinyLm& m, const ForwardPass& fwd, const PromptContext& prompt, const vector_t& dlogits,
                       scalar_t weight, TinyLmGradient& grad) {
  grad.bias.noalias() += weight * dlogits;
  grad.output.noalias() += weight * fwd.hidden * dlogits.transpose();

  const std::size_t elements = fwd.window.size() + (fwd.has_prompt ? 1 : 0);
  if (elements == 0) return;
  const vector_t dhidden = (weight / static_cast<scalar_t>(elements)) * (m.output * dlogits);
  for (TokenId t : fwd.window) grad.embedding.row(t) += dhidden.transpose();
  if (fwd.has_prompt) {
    const vector_t dprompt = dhidden / static_cast<scalar_t>(prompt.item_tokens.size());
    for (TokenId t : prompt.item_tokens) grad.embedding.row(t) += dprompt.transpose();
  }
}

void sgd_step(TinyLm& m, const TinyLmGradient& grad, scalar_t learning_rate) {
  m.embedding -= learning_rate * grad.embedding;
  m.output -= learning_rate * grad.output;
  m.bias -= learning_rate * grad.bias;
}

TinyLmScorer::TinyLmScorer(const TinyLm& model) : model_(&model) {
  if (!model.all_finite()) throw InvalidArgument("model has non-finite parameters");
}

Distribution TinyLmScorer::score(std::span<const TokenId> context, const PromptContext& prompt) const {
  check_ids(*model_, context, "context");
  check_ids(*model_, prompt.item_tokens, "prompt");
  return tiny_forward_pooled(*model_, context, prompt, pool_prompt(*model_, prompt)).probs;
}

// ---------------------------------------------------------------------------------------------
// checkpoint

namespace {

void write_matrix(std::ostream& out, const char* name, const matrix_t& mat) {
  out << '[' << name << "]\n";
  for (Eigen::Index r = 0; r < mat.rows(); ++r) {
    for (Eigen::Index c = 0; c < mat.cols(); ++c) {
      if (c) out << ' ';
      out << fmt::format("{}", mat(r, c));
    }
    out << '\n';
  }
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::string next(const char* expecting) {
    std::string line;
    if (!std::getline(in_, line)) throw ParseError(lineno_ + 1, 0, fmt::format("unexpected end of file, expected {}", expecting));
    ++lineno_;
    return line;
  }
  std::size_t lineno() const { return lineno_; }

  void expect_section(const char* name) {
    const auto line = next(name);
    if (line != fmt::format("[{}]", name)) throw ParseError(lineno_, 0, fmt::format("expected section [{}]", name));
  }

  void read_rows(matrix_t& mat, const char* name) {
    expect_section(name);
    for (Eigen::Index r = 0; r < mat.rows(); ++r) {
      const auto line = next("matrix row");
      const auto cells = split(line, ' ');
      if (static_cast<Eigen::Index>(cells.size()) != mat.cols()) {
        throw ParseError(lineno_, 0, fmt::format("[{}] row has {} values, expected {}", name, cells.size(), mat.cols()));
      }
      std::size_t offset = 0;
      for (Eigen::Index c = 0; c < mat.cols(); ++c) {
        const auto cell = cells[static_cast<std::size_t>(c)];
        double v = 0;
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
          throw ParseError(lineno_, offset, fmt::format("bad number '{}'", cell));
        }
        mat(r, c) = v;
        offset += cell.size() + 1;
      }
    }
  }

 private:
  std::istream& in_;
  std::size_t lineno_ = 0;
};

}  // namespace

void save_checkpoint(std::ostream& out, const TinyLm& m, const Vocabulary& vocab) {
  if (vocab.symbol_count() != m.symbols()) {
    throw InvalidArgument(fmt::format("model has {} symbols but vocabulary has {}", m.symbols(), vocab.symbol_count()));
  }
  out << "TINYLM v1 vocab=" << vocab.size() << " dim=" << m.dim() << " order=" << m.order << '\n';
  out << "[vocab]\n";
  vocab.save(out);
  write_matrix(out, "embedding", m.embedding);
  write_matrix(out, "output", m.output);
  write_matrix(out, "bias", m.bias.transpose());
}

Checkpoint load_checkpoint(std::istream& in) {
  LineReader reader(in);
  const auto header = reader.next("TINYLM header");
  std::size_t vocab_size = 0;
  int dim = 0, order = 0;
  {
    std::istringstream hs(header);
    std::string magic, version, v, d, o;
    hs >> magic >> version >> v >> d >> o;
    auto parse_kv = [&](const std::string& field, const char* key, auto& value) {
      const std::string prefix = std::string(key) + "=";
      if (field.rfind(prefix, 0) != 0) return false;
      auto [ptr, ec] = std::from_chars(field.data() + prefix.size(), field.data() + field.size(), value);
      return ec == std::errc() && ptr == field.data() + field.size();
    };
    std::string rest;
    if (magic != "TINYLM" || version != "v1" || !parse_kv(v, "vocab", vocab_size) || !parse_kv(d, "dim", dim) ||
        !parse_kv(o, "order", order) || (hs >> rest) || dim < 1 || order < 0) {
      throw ParseError(1, 0, "expected `TINYLM v1 vocab=<N> dim=<d> order=<n>` header");
    }
  }

  reader.expect_section("vocab");
  std::ostringstream vocab_text;
  for (std::size_t i = 0; i < vocab_size; ++i) vocab_text << reader.next("vocabulary entry") << '\n';
  Vocabulary vocab;
  {
    std::istringstream vs(vocab_text.str());
    try {
      vocab = Vocabulary::load(vs);
    } catch (const ParseError& e) {
      throw ParseError(1 + e.line() + 1, e.offset(), "bad vocabulary entry");
    }
  }

  Checkpoint ckpt{zero_tiny_lm(vocab_size + 1, dim, order), std::move(vocab)};
  reader.read_rows(ckpt.model.embedding, "embedding");
  reader.read_rows(ckpt.model.output, "output");
  matrix_t bias_row(1, static_cast<Eigen::Index>(vocab_size + 1));
  reader.read_rows(bias_row, "bias");
  ckpt.model.bias = bias_row.transpose();
  std::string trailing;
  if (std::getline(in, trailing) && !trailing.empty()) {
    throw ParseError(reader.lineno() + 1, 0, "unexpected content after [bias] section");
  }
  return ckpt;
}

}  // namespace trieguide
