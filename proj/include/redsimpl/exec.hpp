#pragma once

#include <pthread.h>

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "redsimpl/ir.hpp"

namespace redsimpl {

/// Exact scalar: a rational, or an infinity of either sign.
struct Exact {
  Rational v = 0;
  int inf = 0;

  static Exact infinity(int sign) { return Exact{0, sign}; }
  bool operator==(const Exact& o) const { return inf == o.inf && (inf != 0 || v == o.v); }
};

inline std::string to_string(const Exact& x) {
  if (x.inf) return x.inf > 0 ? "inf" : "-inf";
  return x.v.get_str();
}

inline std::string to_string(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

template <class S>
struct Arith;

template <>
struct Arith<double> {
  static double from_const(const Const& c) {
    if (c.infinity) return c.infinity * HUGE_VAL;
    return c.value.get_d();
  }
  static double from_int(Int k) { return static_cast<double>(k); }
  static double apply(Op op, double a, double b) {
    switch (op) {
      case Op::Add: return a + b;
      case Op::Sub: return a - b;
      case Op::Mul: return a * b;
      case Op::Div: return a / b;
      case Op::Min: return std::min(a, b);
      case Op::Max: return std::max(a, b);
    }
    return 0;
  }
};

template <>
struct Arith<Exact> {
  static Exact from_const(const Const& c) { return Exact{c.value, c.infinity}; }
  static Exact from_int(Int k) { return Exact{Rational(static_cast<long>(k)), 0}; }
  static bool less(const Exact& a, const Exact& b) {
    if (a.inf != b.inf) return a.inf < b.inf;
    return a.inf == 0 && a.v < b.v;
  }
  static int sign(const Exact& a) { return a.inf ? a.inf : sgn(a.v); }
  static Exact apply(Op op, const Exact& a, const Exact& b) {
    switch (op) {
      case Op::Min: return less(b, a) ? b : a;
      case Op::Max: return less(a, b) ? b : a;
      case Op::Add:
      case Op::Sub: {
        int binf = op == Op::Sub ? -b.inf : b.inf;
        if (a.inf && binf && a.inf != binf) fail(ErrorCode::InvalidProgram, "opposite infinities combined");
        if (a.inf) return a;
        if (binf) return Exact::infinity(binf);
        return Exact{op == Op::Add ? Rational(a.v + b.v) : Rational(a.v - b.v), 0};
      }
      case Op::Mul: {
        if (a.inf || b.inf) {
          int s = sign(a) * sign(b);
          if (s == 0) fail(ErrorCode::InvalidProgram, "zero times infinity");
          return Exact::infinity(s);
        }
        return Exact{a.v * b.v, 0};
      }
      case Op::Div: {
        if (b.inf) {
          if (a.inf) fail(ErrorCode::InvalidProgram, "infinity divided by infinity");
          return Exact{0, 0};
        }
        if (b.v == 0) fail(ErrorCode::InvalidProgram, "division by zero");
        if (a.inf) return Exact::infinity(a.inf * sgn(b.v));
        return Exact{a.v / b.v, 0};
      }
    }
    return a;
  }
};

struct PointHash {
  std::size_t operator()(const IntVector& v) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (Int x : v) h = (h ^ static_cast<std::size_t>(x)) * 1099511628211ull + 0x9e3779b97f4a7c15ull;
    return h;
  }
};

template <class S>
using ValueTable = std::unordered_map<IntVector, S, PointHash>;

template <class S>
using Bindings = std::map<std::string, ValueTable<S>>;

/// Values of one variable in lexicographic point order.
template <class S>
using Materialized = std::vector<std::pair<IntVector, S>>;

struct Counters {
  std::uint64_t body_applications = 0;
  std::uint64_t operator_applications = 0;
  std::uint64_t total() const { return body_applications + operator_applications; }
};

/// System over [N, answer..., body...] whose scan with the answer fixed
/// visits the body points that reduce into it.
inline fm::System fiber_system(const Reduce& r) {
  const std::size_t k = r.projection.out_dims(), d = r.body_domain.dims();
  fm::System sys(1 + k + d);
  auto sys_body = r.body_domain.system(std::nullopt, true);
  for (const auto& row : sys_body.rows()) {
    fm::Row x;
    x.a.assign(1 + k + d, 0);
    x.a[0] = row.a[0];
    for (std::size_t i = 0; i < d; ++i) x.a[1 + k + i] = row.a[1 + i];
    x.c = row.c;
    x.eq = row.eq;
    sys.add(std::move(x));
  }
  for (std::size_t j = 0; j < k; ++j) {
    const auto& f = r.projection.rows[j];
    fm::Row x;
    x.a.assign(1 + k + d, 0);
    x.a[0] = f.param;
    x.a[1 + j] = -1;
    for (std::size_t i = 0; i < d; ++i) x.a[1 + k + i] = f.coeffs[i];
    x.c = f.constant;
    x.eq = true;
    sys.add(std::move(x));
  }
  if (sys_body.infeasible()) sys.add(fm::Row{IntVector(1 + k + d, 0), -1, false});
  return sys;
}

/// Demand-driven evaluation of one program at one size with memoization.
template <class S>
class EvalSession {
 public:
  EvalSession(const Program& p, Int n, Bindings<S> inputs) : p_(p), n_(n), inputs_(std::move(inputs)) {
    if (n < 1) fail(ErrorCode::OutOfRange, "size parameter must be at least 1");
    for (const auto& v : p_.vars) {
      if (v.kind != VarKind::Input) continue;
      auto it = inputs_.find(v.name);
      if (it == inputs_.end()) fail(ErrorCode::UnboundInput, "no values bound for input " + v.name);
      for (const auto& z : enumerate_points(v.domain, n))
        if (!it->second.count(z)) fail(ErrorCode::UnboundInput, "input " + v.name + " lacks a value at " + format_vector(z));
    }
    for (std::size_t i = 0; i < p_.equations.size(); ++i) eq_index_[p_.equations[i].var] = i;
  }

  const Counters& counters() const { return counters_; }

  /// Value of a non-input variable at a point of its domain.
  S demand(const std::string& var, const IntVector& z) {
    auto mit = memo_[var].find(z);
    if (mit != memo_[var].end()) return mit->second;
    const VarDecl* d = p_.find_var(var);
    if (!d) fail(ErrorCode::InvalidProgram, "read of undeclared variable " + var);
    if (!d->domain.contains(z, n_)) fail(ErrorCode::DomainHole, var + format_vector(z) + " is outside its domain");
    if (d->kind == VarKind::Input) {
      auto& tab = inputs_.at(var);
      auto it = tab.find(z);
      if (it == tab.end()) fail(ErrorCode::UnboundInput, "input " + var + " lacks a value at " + format_vector(z));
      return it->second;
    }
    auto eit = eq_index_.find(var);
    if (eit == eq_index_.end()) fail(ErrorCode::InvalidProgram, "variable " + var + " has no equation");
    auto key = std::make_pair(var, z);
    if (!in_progress_.insert(key).second) {
      std::string chain;
      for (const auto& [v, pt] : stack_) chain += v + format_vector(pt) + " -> ";
      fail(ErrorCode::Cycle, "value demands itself: " + chain + var + format_vector(z));
    }
    stack_.emplace_back(var, z);
    S val = eval(p_.equations[eit->second].rhs, z);
    stack_.pop_back();
    in_progress_.erase(key);
    memo_[var].emplace(z, val);
    return val;
  }

  /// Materializes every output variable over its domain.
  std::map<std::string, Materialized<S>> outputs() {
    std::map<std::string, Materialized<S>> out;
    for (const auto& v : p_.vars) {
      if (v.kind != VarKind::Output) continue;
      auto& dst = out[v.name];
      for (const auto& z : enumerate_points(v.domain, n_)) dst.emplace_back(z, demand(v.name, z));
    }
    return out;
  }

 private:
  struct Fiber {
    Scanner scanner;
    std::size_t answers = 0;
  };

  const Fiber& fiber(const Reduce& r) {
    auto it = fibers_.find(&r);
    if (it != fibers_.end()) return it->second;
    const std::size_t k = r.projection.out_dims();
    return fibers_.emplace(&r, Fiber{Scanner(fiber_system(r), 1 + k), k}).first->second;
  }

  S eval(const ExprPtr& e, const IntVector& z) {
    if (auto v = e->as<VarRead>()) return demand(v->name, v->access.apply(z, n_));
    if (auto c = e->as<Const>()) return Arith<S>::from_const(*c);
    if (auto b = e->as<Binary>()) {
      S l = eval(b->lhs, z);
      S r = eval(b->rhs, z);
      ++counters_.operator_applications;
      return Arith<S>::apply(b->op, l, r);
    }
    if (auto c = e->as<Case>()) {
      for (const auto& br : c->branches)
        if (br.guard.contains(z, n_)) return eval(br.expr, z);
      fail(ErrorCode::DomainHole, "no case branch covers " + format_vector(z));
    }
    const auto& r = *e->as<Reduce>();
    const Fiber& f = fiber(r);
    IntVector params(1 + z.size());
    params[0] = n_;
    std::copy(z.begin(), z.end(), params.begin() + 1);
    std::optional<S> acc;
    IntVector w;
    f.scanner.for_each(params, [&](std::span<const Int> pt) {
      w.assign(pt.begin(), pt.end());
      S val = eval(r.body, w);
      ++counters_.body_applications;
      acc = acc ? Arith<S>::apply(r.op, *acc, val) : val;
    });
    if (!acc) return Arith<S>::from_const(*identity_of(r.op)->as<Const>());
    return *acc;
  }

  const Program& p_;
  Int n_;
  Bindings<S> inputs_;
  std::map<std::string, std::size_t> eq_index_;
  std::map<std::string, ValueTable<S>> memo_;
  std::set<std::pair<std::string, IntVector>> in_progress_;
  std::vector<std::pair<std::string, IntVector>> stack_;
  std::map<const Reduce*, Fiber> fibers_;
  Counters counters_;
};

/// Runs `fn` on a thread with a large stack; deep recurrences demand one
/// nested call per step.
inline void run_with_big_stack(const std::function<void()>& fn, std::size_t bytes = std::size_t(1) << 30) {
  struct Ctx {
    const std::function<void()>* fn;
    std::exception_ptr err;
  } ctx{&fn, nullptr};
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstacksize(&attr, bytes);
  pthread_t th;
  auto body = [](void* raw) -> void* {
    auto* c = static_cast<Ctx*>(raw);
    try {
      (*c->fn)();
    } catch (...) {
      c->err = std::current_exception();
    }
    return nullptr;
  };
  if (pthread_create(&th, &attr, body, &ctx) != 0) {
    pthread_attr_destroy(&attr);
    fn();
    return;
  }
  pthread_join(th, nullptr);
  pthread_attr_destroy(&attr);
  if (ctx.err) std::rethrow_exception(ctx.err);
}

template <class S>
struct EvalResult {
  std::map<std::string, Materialized<S>> outputs;
  Counters counters;
};

template <class S>
EvalResult<S> evaluate(const Program& p, const Bindings<S>& inputs, Int n) {
  EvalResult<S> res;
  run_with_big_stack([&] {
    EvalSession<S> s(p, n, inputs);
    res.outputs = s.outputs();
    res.counters = s.counters();
  });
  return res;
}

/// Seeded inputs: integers in [-100, 100] for exact kinds, floats in [-1, 1].
template <class S>
Bindings<S> random_inputs(const Program& p, Int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Bindings<S> out;
  for (const auto& v : p.vars) {
    if (v.kind != VarKind::Input) continue;
    auto& tab = out[v.name];
    for (const auto& z : enumerate_points(v.domain, n)) {
      if constexpr (std::is_same_v<S, double>) {
        tab.emplace(z, std::uniform_real_distribution<double>(-1.0, 1.0)(rng));
      } else {
        tab.emplace(z, Arith<S>::from_int(std::uniform_int_distribution<Int>(-100, 100)(rng)));
      }
    }
  }
  return out;
}

template <class S>
Bindings<S> zero_inputs(const Program& p, Int n) {
  Bindings<S> out;
  for (const auto& v : p.vars) {
    if (v.kind != VarKind::Input) continue;
    auto& tab = out[v.name];
    for (const auto& z : enumerate_points(v.domain, n)) tab.emplace(z, Arith<S>::from_int(0));
  }
  return out;
}

struct VerifyReport {
  double max_abs_error = 0;
  double max_rel_error = 0;
  std::uint64_t points_compared = 0;
  bool pass = true;
  std::uint64_t seed = 0;
  std::string first_mismatch;
};

namespace detail {

inline void check_signatures(const Program& a, const Program& b) {
  auto sig = [](const Program& p, VarKind k) {
    std::map<std::string, std::size_t> out;
    for (const auto& v : p.vars)
      if (v.kind == k) out[v.name] = v.domain.dims();
    return out;
  };
  for (VarKind k : {VarKind::Input, VarKind::Output})
    if (sig(a, k) != sig(b, k))
      fail(ErrorCode::SignatureMismatch, "programs differ in their " + var_kind_name(k) + " variables");
}

inline std::uint64_t mix_seed(std::uint64_t seed, Int n, int trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(trial)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

template <class S>
void compare_into(VerifyReport& rep, const std::map<std::string, Materialized<S>>& a,
                  const std::map<std::string, Materialized<S>>& b, double tol, Int n) {
  for (const auto& [name, va] : a) {
    const auto& vb = b.at(name);
    if (va.size() != vb.size()) {
      rep.pass = false;
      if (rep.first_mismatch.empty()) rep.first_mismatch = name + " differs in point count at N=" + std::to_string(n);
      continue;
    }
    for (std::size_t i = 0; i < va.size(); ++i) {
      ++rep.points_compared;
      const S& x = va[i].second;
      const S& y = vb[i].second;
      bool ok;
      double abs_err = 0, rel_err = 0;
      if constexpr (std::is_same_v<S, double>) {
        if (std::isinf(x) || std::isinf(y)) {
          ok = x == y;
          abs_err = rel_err = ok ? 0 : HUGE_VAL;
        } else {
          abs_err = std::fabs(x - y);
          double scale = std::max(std::fabs(x), std::fabs(y));
          rel_err = scale > 0 ? abs_err / scale : 0;
          ok = rel_err <= tol || abs_err <= tol * 1e-3;
        }
      } else {
        ok = x == y;
        if (!ok) {
          abs_err = (x.inf || y.inf) ? HUGE_VAL : Rational(abs(x.v - y.v)).get_d();
          rel_err = HUGE_VAL;
        }
      }
      rep.max_abs_error = std::max(rep.max_abs_error, abs_err);
      rep.max_rel_error = std::max(rep.max_rel_error, rel_err);
      if (!ok) {
        if (rep.first_mismatch.empty())
          rep.first_mismatch = name + format_vector(va[i].first) + " at N=" + std::to_string(n) + ": " + to_string(x) +
                               " vs " + to_string(y);
        rep.pass = false;
      }
    }
  }
}

}  // namespace detail

/// Compares two programs on seeded random inputs; exact equality for
/// integer and rational programs, relative tolerance for floats.
inline VerifyReport verify_equivalence(const Program& a, const Program& b, const std::vector<Int>& sizes, int trials,
                                       std::uint64_t seed, double tol = 1e-6) {
  detail::check_signatures(a, b);
  VerifyReport rep;
  rep.seed = seed;
  bool floats = a.scalar() == ScalarKind::Float || b.scalar() == ScalarKind::Float;
  for (Int n : sizes) {
    for (int t = 0; t < trials; ++t) {
      std::uint64_t s = detail::mix_seed(seed, n, t);
      if (floats) {
        auto in = random_inputs<double>(a, n, s);
        detail::compare_into(rep, evaluate(a, in, n).outputs, evaluate(b, in, n).outputs, tol, n);
      } else {
        auto in = random_inputs<Exact>(a, n, s);
        detail::compare_into(rep, evaluate(a, in, n).outputs, evaluate(b, in, n).outputs, tol, n);
      }
    }
  }
  return rep;
}

/// Body applications plus operator applications per size.
inline std::vector<std::pair<Int, std::uint64_t>> op_profile(const Program& p, const std::vector<Int>& sizes) {
  std::vector<std::pair<Int, std::uint64_t>> out;
  for (Int n : sizes) {
    auto res = evaluate(p, zero_inputs<double>(p, n), n);
    out.emplace_back(n, res.counters.total());
  }
  return out;
}

}  // namespace redsimpl
