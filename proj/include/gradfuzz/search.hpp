// Copyright 2026 The gradfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Gradient-descent search over the input bytes feeding one conditional.
//
// The input values flowing into the predicate form a vector x, one integer
// component per value shape. f(x) is only available by running the target.
// Each partial derivative is a one-sided finite difference
//   (f(x + delta*e_i) - f(x)) / delta
// retried with -delta when the probe no longer reaches the statement and set
// to zero when both probes fail. Descent moves x against the gradient with an
// adaptive learning rate until the constraint holds; zero gradients and
// repeated non-improvement trigger a random restart of the relevant bytes.

#ifndef GRADFUZZ_SEARCH_HPP_
#define GRADFUZZ_SEARCH_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "gradfuzz/bit_vector.hpp"
#include "gradfuzz/constraints.hpp"
#include "gradfuzz/harness.hpp"
#include "gradfuzz/input_buffer.hpp"
#include "gradfuzz/shape_infer.hpp"

namespace gradfuzz {

struct SearchParams {
  int64_t delta = 1;
  double learning_rate = 1.0;  // initial epsilon of every line search
  int max_iters = 256;         // line-search iterations per descend
  uint64_t max_execs = 4096;
  int resample_limit = 16;
  bool little_endian = true;
};

// Runs the target on an input and returns f at the statement, or nothing
// when the run does not reach it.
using Evaluator = std::function<std::optional<FOutput>(const Bytes &)>;

// Counts executions and refuses to run past the budget.
class BudgetedEvaluator {
 public:
  BudgetedEvaluator(Evaluator fn, uint64_t budget, std::function<bool()> stop = {})
      : fn_(std::move(fn)), budget_(budget), stop_(std::move(stop)) {}

  std::optional<FOutput> operator()(const Bytes &input) {
    if (exhausted()) return std::nullopt;
    ++used_;
    return fn_(input);
  }

  bool exhausted() const { return used_ >= budget_ || stopped(); }
  bool stopped() const { return stop_ && stop_(); }
  uint64_t used() const { return used_; }

 private:
  Evaluator fn_;
  uint64_t budget_;
  std::function<bool()> stop_;
  uint64_t used_ = 0;
};

// ---------------------------------------------------------------------------
// x: the input viewed as integer components.

struct Component {
  ValueShape shape;
  Wide value = 0;

  Wide min() const {
    return shape.is_signed ? -(Wide{1} << (8 * shape.size - 1)) : Wide{0};
  }
  Wide max() const {
    return shape.is_signed ? (Wide{1} << (8 * shape.size - 1)) - 1
                           : (Wide{1} << (8 * shape.size)) - 1;
  }
};

class SearchVector {
 public:
  SearchVector() = default;

  static SearchVector Decode(const Bytes &input, const std::vector<ValueShape> &shapes,
                             bool little_endian = true) {
    SearchVector x;
    x.little_endian_ = little_endian;
    for (const ValueShape &s : shapes) {
      uint64_t raw = 0;
      for (std::size_t i = 0; i < s.size; ++i) {
        const std::size_t at = s.offset + i;
        const uint64_t b = at < input.size() ? input[at] : 0;
        const std::size_t pos = little_endian ? i : s.size - 1 - i;
        raw |= b << (8 * pos);
      }
      Component c{s, static_cast<Wide>(raw)};
      if (s.is_signed && s.size < 8 && (raw >> (8 * s.size - 1)) != 0) {
        c.value -= Wide{1} << (8 * s.size);
      } else if (s.is_signed && s.size == 8) {
        c.value = static_cast<int64_t>(raw);
      }
      x.components_.push_back(c);
    }
    return x;
  }

  // Writes every component back into `input` (two's complement).
  void EncodeInto(Bytes &input) const {
    for (const Component &c : components_) {
      const auto raw = static_cast<uint64_t>(c.value);
      for (std::size_t i = 0; i < c.shape.size; ++i) {
        const std::size_t at = c.shape.offset + i;
        if (at >= input.size()) continue;
        const std::size_t pos = little_endian_ ? i : c.shape.size - 1 - i;
        input[at] = static_cast<uint8_t>(raw >> (8 * pos));
      }
    }
  }

  Bytes Encode(Bytes base) const {
    EncodeInto(base);
    return base;
  }

  std::size_t size() const { return components_.size(); }
  const Component &operator[](std::size_t i) const { return components_[i]; }

  // Sets component i, clamped to its representable range.
  void Set(std::size_t i, Wide v) {
    Component &c = components_[i];
    c.value = std::clamp(v, c.min(), c.max());
  }

  friend bool operator==(const SearchVector &a, const SearchVector &b) {
    if (a.components_.size() != b.components_.size()) return false;
    for (std::size_t i = 0; i < a.components_.size(); ++i) {
      if (a.components_[i].value != b.components_[i].value) return false;
    }
    return true;
  }

 private:
  std::vector<Component> components_;
  bool little_endian_ = true;
};

struct Gradient {
  std::vector<double> partials;

  bool IsZero() const {
    return std::all_of(partials.begin(), partials.end(), [](double p) { return p == 0; });
  }
};

inline Gradient CalculateGradient(BudgetedEvaluator &eval, const Bytes &input,
                                  const SearchVector &x, FOutput fx,
                                  const SearchParams &params) {
  Gradient g;
  g.partials.assign(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size() && !eval.exhausted(); ++i) {
    for (const int64_t delta : {params.delta, -params.delta}) {
      SearchVector probe = x;
      probe.Set(i, x[i].value + delta);
      // A clamped probe cannot move; treat it like an unreachable one.
      if (probe[i].value == x[i].value) continue;
      const auto fp = eval(probe.Encode(input));
      if (!fp) continue;
      g.partials[i] = static_cast<double>(fp->value - fx.value) /
                      static_cast<double>(probe[i].value - x[i].value);
      break;
    }
  }
  return g;
}

namespace internal {

// Movement -eps*partial, rounded away from zero, at least one unit.
inline Wide StepFor(double partial, double eps) {
  if (partial == 0) return 0;
  const double mag = std::ceil(std::fabs(eps * partial));
  // Anything beyond 2^100 is clamped by the component range anyway.
  const Wide m = mag >= 0x1p100 ? (Wide{1} << 100) : std::max<Wide>(1, static_cast<Wide>(mag));
  return partial > 0 ? -m : m;
}

// Backtracking line search along -grad restricted to `dims`. Updates x/f in
// place; returns true once the constraint holds.
inline bool LineSearch(BudgetedEvaluator &eval, const Bytes &input, ConstraintKind kind,
                       const Gradient &grad, const std::vector<std::size_t> &dims,
                       const SearchParams &params, SearchVector &x, FOutput &f) {
  double max_abs = 0;
  for (std::size_t i : dims) max_abs = std::max(max_abs, std::fabs(grad.partials[i]));
  if (max_abs == 0) return false;
  double eps = params.learning_rate;
  std::optional<SearchVector> rejected;
  for (int iter = 0; iter < params.max_iters && !eval.exhausted(); ++iter) {
    SearchVector cand = x;
    for (std::size_t i : dims) cand.Set(i, x[i].value + StepFor(grad.partials[i], eps));
    if (cand == x) break;
    // Rounding and clamping can map a smaller eps onto the point that was
    // just rejected; skip the execution in that case.
    std::optional<FOutput> fc;
    if (!rejected || !(cand == *rejected)) fc = eval(cand.Encode(input));
    if (fc && *fc < f) {
      rejected.reset();
      x = std::move(cand);
      f = *fc;
      if (Satisfied(kind, f)) return true;
      eps *= 2;
    } else {
      rejected = std::move(cand);
      if (eps * max_abs <= 1) break;  // already at the minimum step
      eps /= 2;
    }
  }
  return false;
}

}  // namespace internal

struct DescendResult {
  Bytes input;
  FOutput f;
};

// Moves x against `grad`: first along the full gradient, then one component
// at a time in order of decreasing |partial|. Returns the best input seen.
inline DescendResult Descend(BudgetedEvaluator &eval, const Bytes &input,
                             const std::vector<ValueShape> &shapes, ConstraintKind kind,
                             FOutput fx, const Gradient &grad, const SearchParams &params) {
  SearchVector x = SearchVector::Decode(input, shapes, params.little_endian);
  FOutput f = fx;
  if (!Satisfied(kind, f)) {
    std::vector<std::size_t> all;
    for (std::size_t i = 0; i < grad.partials.size(); ++i) {
      if (grad.partials[i] != 0) all.push_back(i);
    }
    bool done = internal::LineSearch(eval, input, kind, grad, all, params, x, f);
    if (!done && all.size() > 1) {
      std::stable_sort(all.begin(), all.end(), [&](std::size_t a, std::size_t b) {
        return std::fabs(grad.partials[a]) > std::fabs(grad.partials[b]);
      });
      for (std::size_t i : all) {
        if (internal::LineSearch(eval, input, kind, grad, {i}, params, x, f)) break;
      }
    }
  }
  return {x.Encode(input), f};
}

// Replaces every byte in `offsets` with a random value; other bytes are kept.
template <typename Rng>
Bytes Resample(const Bytes &input, const BitVector &offsets, Rng &rng) {
  Bytes out = input;
  std::uniform_int_distribution<int> byte(0, 255);
  for (std::size_t o : offsets.offsets()) {
    if (o < out.size()) out[o] = static_cast<uint8_t>(byte(rng));
  }
  return out;
}

struct SearchProblem {
  Bytes input;
  std::vector<ValueShape> shapes;
  BitVector offsets;
  ConstraintKind kind = ConstraintKind::kEqualZero;
};

struct SolveOutcome {
  enum class Status : uint8_t { kSolved, kBudgetExhausted, kStopped };

  Status status = Status::kBudgetExhausted;
  Bytes input;  // satisfying input when solved, best seen otherwise
  std::optional<FOutput> f;
  uint64_t execs = 0;
  int resamples = 0;

  bool solved() const { return status == Status::kSolved; }
};

// Repeats gradient and descend until the constraint holds or the budget runs
// out. A zero gradient or a descend that fails to improve triggers a resample.
template <typename Rng>
SolveOutcome FuzzConditional(const Evaluator &fn, const SearchProblem &problem,
                             const SearchParams &params, Rng &rng,
                             std::function<bool()> stop = {}) {
  BudgetedEvaluator eval(fn, params.max_execs, std::move(stop));
  SolveOutcome out;
  auto finish = [&](SolveOutcome::Status s) {
    if (s != SolveOutcome::Status::kSolved && eval.stopped()) s = SolveOutcome::Status::kStopped;
    out.status = s;
    out.execs = eval.used();
    return out;
  };

  Bytes x = problem.input;
  std::optional<FOutput> fx = eval(x);
  out.input = x;
  out.f = fx;
  if (!fx) return finish(SolveOutcome::Status::kBudgetExhausted);
  if (Satisfied(problem.kind, *fx)) return finish(SolveOutcome::Status::kSolved);

  auto keep_best = [&](const Bytes &in, FOutput f) {
    if (!out.f || f < *out.f) {
      out.input = in;
      out.f = f;
    }
  };

  // Returns true when the resampled point satisfies the constraint.
  auto resample = [&]() {
    ++out.resamples;
    Bytes cand = Resample(x, problem.offsets, rng);
    const auto fc = eval(cand);
    if (!fc) return false;
    x = std::move(cand);
    fx = fc;
    keep_best(x, *fx);
    return Satisfied(problem.kind, *fx);
  };

  while (!eval.exhausted()) {
    const SearchVector vec = SearchVector::Decode(x, problem.shapes, params.little_endian);
    const Gradient grad = CalculateGradient(eval, x, vec, *fx, params);
    if (eval.exhausted()) break;
    if (grad.IsZero()) {
      if (out.resamples >= params.resample_limit) break;
      if (resample()) return finish(SolveOutcome::Status::kSolved);
      continue;
    }
    DescendResult d = Descend(eval, x, problem.shapes, problem.kind, *fx, grad, params);
    if (Satisfied(problem.kind, d.f)) {
      out.input = std::move(d.input);
      out.f = d.f;
      return finish(SolveOutcome::Status::kSolved);
    }
    if (d.f < *fx) {
      x = std::move(d.input);
      fx = d.f;
      keep_best(x, *fx);
    } else {
      // Gradient and descend are deterministic, so retrying from the same
      // point would repeat the same executions.
      if (out.resamples >= params.resample_limit) break;
      if (resample()) return finish(SolveOutcome::Status::kSolved);
    }
  }
  return finish(SolveOutcome::Status::kBudgetExhausted);
}

// Evaluator that runs `executor` in fast mode and reads f for `direction` of
// the first execution of `stmt`.
inline Evaluator TargetEvaluator(Executor &executor, StmtId stmt, bool direction) {
  return [&executor, stmt, direction](const Bytes &input) -> std::optional<FOutput> {
    RunOptions ro;
    ro.watch = stmt;
    const RunResult r = executor.RunFast(input, ro);
    if (!r.watched) return std::nullopt;
    return r.watched->ForDirection(direction).f;
  };
}

// Problem for flipping `record` to `direction`, starting from `input`.
inline SearchProblem ProblemFor(const CondStmtRecord &record, bool direction, Bytes input) {
  SearchProblem p;
  p.input = std::move(input);
  p.shapes = record.shapes;
  p.offsets = record.offsets;
  p.kind = record.ForDirection(direction).kind;
  return p;
}

}  // namespace gradfuzz

#endif  // GRADFUZZ_SEARCH_HPP_
