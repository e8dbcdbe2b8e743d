#include "coopht/vlsim.hpp"

#include "coopht/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace coopht {

BitString string_of_int(std::uint64_t m) {
  if (m == 0) throw usage_error("string_of_int: 0 is the reserved flag");
  std::string bits;
  while (m > 0) {
    bits.push_back(static_cast<char>('0' + (m & 1)));
    m >>= 1;
  }
  std::reverse(bits.begin(), bits.end());
  return BitString{std::move(bits)};
}

std::uint64_t dec(const BitString& b) {
  if (b.bits.empty()) throw usage_error("dec: empty bit-string");
  std::uint64_t v = 0;
  for (char c : b.bits) {
    if (c != '0' && c != '1') throw usage_error("dec: non-binary character");
    v = (v << 1) | static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

int len(const BitString& b) {
  if (b.bits.empty()) throw usage_error("len: empty bit-string");
  return static_cast<int>(b.bits.size());
}

bool is_typical(const std::vector<int>& seq, const Eigen::VectorXd& probs,
                double mu, SlackMode mode) {
  if (mu <= 0.0) throw usage_error("is_typical: mu must be positive");
  const int k = static_cast<int>(probs.size());
  std::vector<int> counts(k, 0);
  for (int v : seq) {
    if (v < 0 || v >= k) throw usage_error("is_typical: symbol out of range");
    ++counts[v];
  }
  const double n = static_cast<double>(seq.size());
  for (int v = 0; v < k; ++v) {
    if (probs(v) == 0.0 && counts[v] > 0) return false;
    const double slack =
        mode == SlackMode::Proportional ? mu * probs(v) : mu;
    if (std::abs(counts[v] / n - probs(v)) > slack) return false;
  }
  return true;
}

bool is_typical(const std::vector<int>& seq, const Eigen::VectorXd& probs,
                double mu) {
  return is_typical(seq, probs, mu, SlackMode::Absolute);
}

namespace {

std::vector<int> combine2(const std::vector<int>& a, const std::vector<int>& b,
                          int base_b) {
  std::vector<int> out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] * base_b + b[i];
  return out;
}

std::vector<int> combine3(const std::vector<int>& a, const std::vector<int>& b,
                          int base_b, const std::vector<int>& c, int base_c) {
  std::vector<int> out(a.size());
  for (size_t i = 0; i < a.size(); ++i)
    out[i] = (a[i] * base_b + b[i]) * base_c + c[i];
  return out;
}

double lg(double x) { return std::lgamma(x + 1.0); }

// Exact Pr[type of an i.i.d. block lies in the typicality box], by
// enumerating admissible count vectors. Returns -1 when the enumeration
// would be too large.
double exact_typical_probability(const Eigen::VectorXd& p, int n, double mu,
                                 SlackMode mode) {
  const int k = static_cast<int>(p.size());
  std::vector<int> lo(k), hi(k);
  double boxes = 1.0;
  for (int v = 0; v < k; ++v) {
    if (p(v) == 0.0) {
      lo[v] = hi[v] = 0;
    } else {
      const double slack = mode == SlackMode::Proportional ? mu * p(v) : mu;
      lo[v] = std::max(
          0, static_cast<int>(std::ceil(n * (p(v) - slack) - 1e-12)));
      hi[v] = std::min(
          n, static_cast<int>(std::floor(n * (p(v) + slack) + 1e-12)));
      if (lo[v] > hi[v]) return 0.0;
    }
    boxes *= hi[v] - lo[v] + 1;
  }
  if (boxes > 2e6) return -1.0;

  double total = 0.0;
  std::vector<int> cnt(k, 0);
  // recursive enumeration without actual recursion: odometer over the box
  std::vector<int> cur = lo;
  while (true) {
    int sum = std::accumulate(cur.begin(), cur.end(), 0);
    if (sum == n) {
      double logp = lg(n);
      for (int v = 0; v < k; ++v) {
        logp -= lg(cur[v]);
        if (cur[v] > 0) logp += cur[v] * std::log(p(v));
      }
      total += std::exp(logp);
    }
    int d = k - 1;
    while (d >= 0) {
      if (++cur[d] <= hi[d]) break;
      cur[d] = lo[d];
      --d;
    }
    if (d < 0) break;
  }
  return std::min(total, 1.0);
}

}  // namespace

Simulator::Simulator(SourceModel s, SimConfig cfg)
    : s_(std::move(s)), cfg_(std::move(cfg)) {
  if (cfg_.n < 1) throw usage_error("SimConfig: n must be positive");
  if (!(cfg_.mu > 0.0 && cfg_.mu < cfg_.epsilon && cfg_.epsilon < 1.0))
    throw usage_error("SimConfig: need 0 < mu < epsilon < 1");
  if (cfg_.trials < 1) throw usage_error("SimConfig: trials must be >= 1");

  const JointPmf j =
      build_cooperative_joint(s_.px1x2(), s_.py_given_x2(),
                              cfg_.aux.pu1_given_x1, cfg_.aux.pu2_given_u1x2);
  nu1_ = j.axis_sizes()[0];
  nu2_ = j.axis_sizes()[1];
  nx1_ = j.axis_sizes()[2];
  nx2_ = j.axis_sizes()[3];
  ny_ = j.axis_sizes()[4];

  i1_ = mutual_information(j, {0}, {2});
  i2_ = conditional_mutual_information(j, {1}, {3}, {0});
  theta_ = mutual_information(j, {0, 1}, {4});

  pu1_ = axis_marginal(j, 0).probs();
  const JointPmf ju1u2 = marginalize(j, {0, 1});
  pu2_given_u1_.resize(nu1_, nu2_);
  for (int u1 = 0; u1 < nu1_; ++u1) {
    double rowsum = 0.0;
    for (int u2 = 0; u2 < nu2_; ++u2)
      rowsum += ju1u2.probs()(u1 * nu2_ + u2);
    for (int u2 = 0; u2 < nu2_; ++u2)
      pu2_given_u1_(u1, u2) =
          rowsum > 0.0 ? ju1u2.probs()(u1 * nu2_ + u2) / rowsum : 1.0 / nu2_;
  }
  px1_ = axis_marginal(j, 2).probs();
  p_u1x1_ = marginalize(j, {0, 2}).probs();
  p_u1u2x2_ = marginalize(j, {0, 1, 3}).probs();
  p_u1u2y_ = marginalize(j, {0, 1, 4}).probs();

  m1_count_ = static_cast<std::uint64_t>(
      std::ceil(std::exp2(cfg_.n * (i1_ + cfg_.mu)) - 1e-9));
  m2_count_ = static_cast<std::uint64_t>(
      std::ceil(std::exp2(cfg_.n * (i2_ + cfg_.mu)) - 1e-9));
  m1_count_ = std::max<std::uint64_t>(m1_count_, 1);
  m2_count_ = std::max<std::uint64_t>(m2_count_, 1);
  const double symbols =
      static_cast<double>(m1_count_) * (1.0 + static_cast<double>(m2_count_)) *
      cfg_.n;
  if (symbols > 1e8)
    throw usage_error("Simulator: codebooks need " + std::to_string(symbols) +
                      " symbols (limit 1e8); reduce n or the auxiliary rates");

  if (cfg_.s_n_mode == SnMode::Enumerate) {
    build_enumerated_sn();
  } else {
    double p_typ = typical_set_probability();
    const double target = cfg_.epsilon - cfg_.mu;
    if (p_typ <= 0.0) {
      coin_accept_ratio_ = 1.0;
      coin_ratio_clamped_ = true;
    } else if (target >= p_typ) {
      coin_accept_ratio_ = 1.0;
      coin_ratio_clamped_ = true;
    } else {
      coin_accept_ratio_ = target / p_typ;
    }
  }
}

double Simulator::typical_set_probability() const {
  double p = exact_typical_probability(px1_, cfg_.n, cfg_.mu, cfg_.slack_mode);
  if (p >= 0.0) return p;
  // Monte-Carlo fallback, fixed internal seed offset for reproducibility.
  std::mt19937_64 rng(mix_seed(cfg_.seed, 0x715CA1));
  const int samples = 1000000;
  std::vector<int> seq(cfg_.n);
  long hits = 0;
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < cfg_.n; ++i) seq[i] = categorical(rng, px1_);
    if (is_typical(seq, px1_, cfg_.mu, cfg_.slack_mode)) ++hits;
  }
  return static_cast<double>(hits) / samples;
}

void Simulator::build_enumerated_sn() {
  double total = std::pow(static_cast<double>(nx1_), cfg_.n);
  if (total > 1e7)
    throw usage_error(
        "Simulator: enumerate-mode S_n infeasible at this n; use coin mode");
  const std::uint64_t count = static_cast<std::uint64_t>(total);
  struct Entry {
    double prob;
    std::uint64_t code;
  };
  std::vector<Entry> typical;
  std::vector<int> seq(cfg_.n);
  sn_member_.assign(count, 0);
  for (std::uint64_t code = 0; code < count; ++code) {
    std::uint64_t c = code;
    double prob = 1.0;
    for (int i = cfg_.n - 1; i >= 0; --i) {
      seq[i] = static_cast<int>(c % nx1_);
      c /= nx1_;
      prob *= px1_(seq[i]);
    }
    if (prob > 0.0 && is_typical(seq, px1_, cfg_.mu, cfg_.slack_mode))
      typical.push_back({prob, code});
  }
  std::sort(typical.begin(), typical.end(), [](const Entry& a, const Entry& b) {
    if (a.prob != b.prob) return a.prob > b.prob;
    return a.code < b.code;
  });
  const double target = cfg_.epsilon - cfg_.mu;
  double cum = 0.0;
  for (const Entry& e : typical) {
    if (cum + e.prob > target + 1e-15) break;
    cum += e.prob;
    sn_member_[e.code] = 1;
  }
  sn_prob_ = cum;
}

std::uint64_t Simulator::seq_code(const std::vector<int>& seq,
                                  int base) const {
  std::uint64_t c = 0;
  for (int v : seq) c = c * base + static_cast<std::uint64_t>(v);
  return c;
}

double Simulator::s_n_probability() const {
  if (cfg_.s_n_mode != SnMode::Enumerate)
    throw usage_error("s_n_probability: only defined in enumerate mode");
  return sn_prob_;
}

bool Simulator::in_s_n(const std::vector<int>& x1_seq,
                       std::mt19937_64& rng) const {
  if (!is_typical(x1_seq, px1_, cfg_.mu, cfg_.slack_mode)) return false;
  if (cfg_.s_n_mode == SnMode::Enumerate)
    return sn_member_[seq_code(x1_seq, nx1_)] != 0;
  return uniform01(rng) < coin_accept_ratio_;
}

std::pair<Codebook1, Codebook2> Simulator::generate_codebooks(
    std::uint64_t seed) const {
  std::mt19937_64 rng(mix_seed(seed, 0xCB1));
  Codebook1 cb1;
  cb1.n = cfg_.n;
  cb1.words.resize(m1_count_);
  for (auto& w : cb1.words) {
    w.resize(cfg_.n);
    for (int i = 0; i < cfg_.n; ++i) w[i] = categorical(rng, pu1_);
  }
  Codebook2 cb2;
  cb2.n = cfg_.n;
  cb2.words.resize(m1_count_);
  for (std::uint64_t m1 = 0; m1 < m1_count_; ++m1) {
    cb2.words[m1].resize(m2_count_);
    for (auto& w : cb2.words[m1]) {
      w.resize(cfg_.n);
      for (int i = 0; i < cfg_.n; ++i) {
        const int u1 = cb1.words[m1][i];
        w[i] = categorical(rng, pu2_given_u1_.row(u1).transpose());
      }
    }
  }
  return {std::move(cb1), std::move(cb2)};
}

BitString Simulator::encode1(const std::vector<int>& x1_seq,
                             const Codebook1& cb1,
                             std::mt19937_64& rng) const {
  if (in_s_n(x1_seq, rng)) return flag_string();
  std::vector<std::uint64_t> matches;
  for (std::uint64_t m1 = 0; m1 < cb1.words.size(); ++m1) {
    const std::vector<int> pair = combine2(cb1.words[m1], x1_seq, nx1_);
    if (is_typical(pair, p_u1x1_, cfg_.mu, cfg_.slack_mode))
      matches.push_back(m1 + 1);
  }
  if (matches.empty()) return flag_string();
  const size_t pick = std::min<size_t>(
      static_cast<size_t>(uniform01(rng) * matches.size()),
      matches.size() - 1);
  return string_of_int(matches[pick]);
}

BitString Simulator::encode2(const std::vector<int>& x2_seq,
                             const BitString& m1, const Codebook1& cb1,
                             const Codebook2& cb2,
                             std::mt19937_64& rng) const {
  if (is_flag(m1)) return flag_string();
  const std::uint64_t idx1 = dec(m1);
  if (idx1 == 0 || idx1 > cb2.words.size())
    throw usage_error("encode2: message index out of codebook range");
  const std::vector<int>& u1_word = cb1.words[idx1 - 1];
  const auto& books = cb2.words[idx1 - 1];
  std::vector<std::uint64_t> matches;
  for (std::uint64_t m2 = 0; m2 < books.size(); ++m2) {
    const std::vector<int> triple =
        combine3(u1_word, books[m2], nu2_, x2_seq, nx2_);
    if (is_typical(triple, p_u1u2x2_, cfg_.mu, cfg_.slack_mode))
      matches.push_back(m2 + 1);
  }
  if (matches.empty()) return flag_string();
  const size_t pick = std::min<size_t>(
      static_cast<size_t>(uniform01(rng) * matches.size()),
      matches.size() - 1);
  return string_of_int(matches[pick]);
}

int Simulator::decide(const std::vector<int>& y_seq, const BitString& m1,
                      const BitString& m2, const Codebook1& cb1,
                      const Codebook2& cb2) const {
  if (is_flag(m1) || is_flag(m2)) return 1;
  const std::uint64_t i1 = dec(m1);
  const std::uint64_t i2 = dec(m2);
  if (i1 == 0 || i1 > cb1.words.size() || i2 == 0 ||
      i2 > cb2.words[i1 - 1].size())
    throw usage_error("decide: message index out of codebook range");
  const std::vector<int> triple = combine3(
      cb1.words[i1 - 1], cb2.words[i1 - 1][i2 - 1], nu2_, y_seq, ny_);
  return is_typical(triple, p_u1u2y_, cfg_.mu, cfg_.slack_mode) ? 0 : 1;
}

SimReport Simulator::run_monte_carlo() const {
  auto [cb1, cb2] = generate_codebooks(cfg_.seed);
  return run_monte_carlo(cb1, cb2);
}

SimReport Simulator::run_monte_carlo(const Codebook1& cb1,
                                     const Codebook2& cb2) const {
  SimReport rep;
  rep.trials = cfg_.trials;
  rep.n = cfg_.n;
  const Eigen::VectorXd& px1x2 = s_.px1x2().probs();
  const Eigen::MatrixXd& c = s_.py_given_x2().table();
  const Eigen::VectorXd& py = s_.py().probs();

  long alarms_h0 = 0, accepts_h1 = 0;
  double len1_sum = 0.0, len2_sum = 0.0;

  std::vector<int> x1(cfg_.n), x2(cfg_.n), y(cfg_.n);
  for (int hyp = 0; hyp <= 1; ++hyp) {
    PathCounts& pc = hyp == 0 ? rep.h0 : rep.h1;
    for (int t = 0; t < cfg_.trials; ++t) {
      std::mt19937_64 rng(mix_seed(cfg_.seed, 2ULL * t + hyp + 1));
      for (int i = 0; i < cfg_.n; ++i) {
        const int pair = categorical(rng, px1x2);
        x1[i] = pair / nx2_;
        x2[i] = pair % nx2_;
        y[i] = hyp == 0 ? categorical(rng, c.row(x2[i]).transpose())
                        : categorical(rng, py);
      }

      // Inline transmitter 1 so the decision path is observable; same
      // randomness order as encode1.
      BitString m1 = flag_string();
      bool sn = in_s_n(x1, rng);
      if (sn) {
        ++pc.sn_hit;
      } else {
        std::vector<std::uint64_t> matches;
        for (std::uint64_t m = 0; m < cb1.words.size(); ++m)
          if (is_typical(combine2(cb1.words[m], x1, nx1_), p_u1x1_, cfg_.mu,
                         cfg_.slack_mode))
            matches.push_back(m + 1);
        if (matches.empty()) {
          ++pc.enc1_fail;
        } else {
          const size_t pick = std::min<size_t>(
              static_cast<size_t>(uniform01(rng) * matches.size()),
              matches.size() - 1);
          m1 = string_of_int(matches[pick]);
        }
      }

      BitString m2 = encode2(x2, m1, cb1, cb2, rng);
      if (!is_flag(m1) && is_flag(m2)) ++pc.enc2_fail;

      const int decision = decide(y, m1, m2, cb1, cb2);
      if (!is_flag(m1) && !is_flag(m2)) {
        if (decision == 0)
          ++pc.accept;
        else
          ++pc.reject;
      }
      if (hyp == 0) {
        if (decision == 1) ++alarms_h0;
        len1_sum += len(m1);
        len2_sum += len(m2);
      } else if (decision == 0) {
        ++accepts_h1;
      }
    }
  }

  const double nt = static_cast<double>(cfg_.trials);
  rep.alpha_hat = alarms_h0 / nt;
  rep.beta_hat = accepts_h1 / nt;
  rep.alpha_se = std::sqrt(rep.alpha_hat * (1.0 - rep.alpha_hat) / nt);
  rep.beta_se = std::sqrt(rep.beta_hat * (1.0 - rep.beta_hat) / nt);
  rep.mean_len1 = len1_sum / nt;
  rep.mean_len2 = len2_sum / nt;
  rep.empirical_exponent =
      rep.beta_hat > 0.0 ? -std::log2(rep.beta_hat) / cfg_.n
                         : std::numeric_limits<double>::infinity();
  return rep;
}

std::pair<double, double> Simulator::exact_error_probabilities(
    const Codebook1& cb1, const Codebook2& cb2) const {
  if (cfg_.s_n_mode != SnMode::Enumerate)
    throw usage_error(
        "exact_error_probabilities: requires enumerate-mode S_n");
  const double n1 = std::pow(static_cast<double>(nx1_), cfg_.n);
  const double n2 = std::pow(static_cast<double>(nx2_), cfg_.n);
  const double n3 = std::pow(static_cast<double>(ny_), cfg_.n);
  if (n1 * n2 * n3 > 3e7)
    throw usage_error("exact_error_probabilities: block space too large");
  const std::uint64_t c1 = static_cast<std::uint64_t>(n1);
  const std::uint64_t c2 = static_cast<std::uint64_t>(n2);
  const std::uint64_t c3 = static_cast<std::uint64_t>(n3);
  const std::uint64_t nm1 = cb1.words.size();
  const std::uint64_t nm2 = cb2.words[0].size();

  auto decode_seq = [this](std::uint64_t code, int base, std::vector<int>& s) {
    for (int i = cfg_.n - 1; i >= 0; --i) {
      s[i] = static_cast<int>(code % base);
      code /= base;
    }
  };

  // Per-x1 match sets (S_n membership folded in).
  std::vector<std::vector<std::uint64_t>> matches1(c1);
  std::vector<std::uint8_t> in_sn(c1, 0);
  std::vector<int> seq(cfg_.n);
  for (std::uint64_t xc = 0; xc < c1; ++xc) {
    decode_seq(xc, nx1_, seq);
    in_sn[xc] = sn_member_[xc];
    if (in_sn[xc]) continue;
    for (std::uint64_t m = 0; m < nm1; ++m)
      if (is_typical(combine2(cb1.words[m], seq, nx1_), p_u1x1_, cfg_.mu,
                     cfg_.slack_mode))
        matches1[xc].push_back(m);
  }

  // Per-(m1, x2) match sets.
  std::vector<std::vector<std::uint64_t>> matches2(nm1 * c2);
  for (std::uint64_t m = 0; m < nm1; ++m)
    for (std::uint64_t xc = 0; xc < c2; ++xc) {
      decode_seq(xc, nx2_, seq);
      auto& lst = matches2[m * c2 + xc];
      for (std::uint64_t m2 = 0; m2 < nm2; ++m2)
        if (is_typical(
                combine3(cb1.words[m], cb2.words[m][m2], nu2_, seq, nx2_),
                p_u1u2x2_, cfg_.mu, cfg_.slack_mode))
          lst.push_back(m2);
    }

  // Per-(m1, m2, y) acceptance.
  std::vector<std::uint8_t> accept(nm1 * nm2 * c3, 0);
  for (std::uint64_t m = 0; m < nm1; ++m)
    for (std::uint64_t m2 = 0; m2 < nm2; ++m2)
      for (std::uint64_t yc = 0; yc < c3; ++yc) {
        decode_seq(yc, ny_, seq);
        accept[(m * nm2 + m2) * c3 + yc] = is_typical(
            combine3(cb1.words[m], cb2.words[m][m2], nu2_, seq, ny_),
            p_u1u2y_, cfg_.mu, cfg_.slack_mode);
      }

  // Sequence probabilities.
  const Eigen::VectorXd& w = s_.px1x2().probs();
  const Eigen::MatrixXd& c = s_.py_given_x2().table();
  const Eigen::VectorXd& py = s_.py().probs();

  std::vector<double> py_block(c3);
  for (std::uint64_t yc = 0; yc < c3; ++yc) {
    decode_seq(yc, ny_, seq);
    double p = 1.0;
    for (int v : seq) p *= py(v);
    py_block[yc] = p;
  }

  double alpha = 0.0, beta = 0.0;
  std::vector<int> sx1(cfg_.n), sx2(cfg_.n), sy(cfg_.n);
  for (std::uint64_t xc1 = 0; xc1 < c1; ++xc1) {
    decode_seq(xc1, nx1_, sx1);
    for (std::uint64_t xc2 = 0; xc2 < c2; ++xc2) {
      decode_seq(xc2, nx2_, sx2);
      double p12 = 1.0;
      for (int i = 0; i < cfg_.n; ++i) p12 *= w(sx1[i] * nx2_ + sx2[i]);
      if (p12 == 0.0) continue;

      if (in_sn[xc1] || matches1[xc1].empty()) {
        alpha += p12;  // always declares 1 under H0; never accepts under H1
        continue;
      }
      const auto& ms1 = matches1[xc1];
      for (std::uint64_t yc = 0; yc < c3; ++yc) {
        double acc = 0.0;
        for (std::uint64_t m : ms1) {
          const auto& ms2 = matches2[m * c2 + xc2];
          if (ms2.empty()) continue;
          double a2 = 0.0;
          for (std::uint64_t m2 : ms2)
            a2 += accept[(m * nm2 + m2) * c3 + yc];
          acc += a2 / ms2.size();
        }
        acc /= ms1.size();
        decode_seq(yc, ny_, sy);
        double pyh0 = 1.0;
        for (int i = 0; i < cfg_.n; ++i) pyh0 *= c(sx2[i], sy[i]);
        alpha += p12 * pyh0 * (1.0 - acc);
        beta += p12 * py_block[yc] * acc;
      }
    }
  }
  return {alpha, beta};
}

}  // namespace coopht
