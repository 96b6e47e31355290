#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "cruse/error.hpp"
#include "cruse/nn/activation.hpp"
#include "cruse/nn/tensor.hpp"

namespace cruse::nn {

template <typename T = double>
struct GruState {
  std::vector<T> h;
};

template <typename T = double>
struct LstmState {
  std::vector<T> h;
  std::vector<T> c;
};

// Gated recurrent unit, reset gate applied after the recurrent matmul:
//   r = sig(Wr x + bir + Ur h + bhr)
//   z = sig(Wz x + biz + Uz h + bhz)
//   n = tanh(Wn x + bin + r * (Un h + bhn))
//   h' = (1 - z) * n + z * h
// Gate blocks are stacked in the order r, z, n.
template <typename T = double>
class Gru {
 public:
  using State = GruState<T>;
  static constexpr std::size_t kGates = 3;

  Gru() = default;
  Gru(std::size_t in, std::size_t width)
      : in_(in),
        width_(width),
        w_input_(kGates * width * in),
        w_hidden_(kGates * width * width),
        b_input_(kGates * width),
        b_hidden_(kGates * width) {}

  std::size_t in_dims() const { return in_; }
  std::size_t width() const { return width_; }

  std::span<T> input_weight() { return w_input_; }
  std::span<T> hidden_weight() { return w_hidden_; }
  std::span<T> input_bias() { return b_input_; }
  std::span<T> hidden_bias() { return b_hidden_; }
  std::span<const T> input_weight() const { return w_input_; }
  std::span<const T> hidden_weight() const { return w_hidden_; }
  std::span<const T> input_bias() const { return b_input_; }
  std::span<const T> hidden_bias() const { return b_hidden_; }

  std::vector<std::span<T>> parameters() { return {w_input_, w_hidden_, b_input_, b_hidden_}; }
  std::vector<std::span<const T>> parameters() const {
    return {w_input_, w_hidden_, b_input_, b_hidden_};
  }

  State initial_state() const { return {std::vector<T>(width_, T{})}; }

  // Advances the state by one step; the output equals the new hidden state.
  std::span<const T> step(std::span<const T> x, State& state) const {
    if (x.size() != in_) throw ShapeError("Gru::step: input width mismatch");
    if (state.h.size() != width_) throw ShapeError("Gru::step: state width mismatch");
    const std::size_t w = width_;
    std::vector<T> gx(b_input_.begin(), b_input_.end());
    std::vector<T> gh(b_hidden_.begin(), b_hidden_.end());
    matvec_accumulate<T>(w_input_, kGates * w, in_, x, gx);
    matvec_accumulate<T>(w_hidden_, kGates * w, w, state.h, gh);
    for (std::size_t j = 0; j < w; ++j) {
      const T r = sigmoid(gx[j] + gh[j]);
      const T z = sigmoid(gx[w + j] + gh[w + j]);
      const T n = std::tanh(gx[2 * w + j] + r * gh[2 * w + j]);
      state.h[j] = (T{1} - z) * n + z * state.h[j];
    }
    return state.h;
  }

 private:
  std::size_t in_ = 0;
  std::size_t width_ = 0;
  std::vector<T> w_input_;
  std::vector<T> w_hidden_;
  std::vector<T> b_input_;
  std::vector<T> b_hidden_;
};

// Long short-term memory cell; gate blocks stacked i, f, g, o.
//   c' = f * c + i * g,  h' = o * tanh(c')
template <typename T = double>
class Lstm {
 public:
  using State = LstmState<T>;
  static constexpr std::size_t kGates = 4;

  Lstm() = default;
  Lstm(std::size_t in, std::size_t width)
      : in_(in),
        width_(width),
        w_input_(kGates * width * in),
        w_hidden_(kGates * width * width),
        b_input_(kGates * width),
        b_hidden_(kGates * width) {}

  std::size_t in_dims() const { return in_; }
  std::size_t width() const { return width_; }

  std::span<T> input_weight() { return w_input_; }
  std::span<T> hidden_weight() { return w_hidden_; }
  std::span<T> input_bias() { return b_input_; }
  std::span<T> hidden_bias() { return b_hidden_; }
  std::span<const T> input_weight() const { return w_input_; }
  std::span<const T> hidden_weight() const { return w_hidden_; }
  std::span<const T> input_bias() const { return b_input_; }
  std::span<const T> hidden_bias() const { return b_hidden_; }

  std::vector<std::span<T>> parameters() { return {w_input_, w_hidden_, b_input_, b_hidden_}; }
  std::vector<std::span<const T>> parameters() const {
    return {w_input_, w_hidden_, b_input_, b_hidden_};
  }

  State initial_state() const { return {std::vector<T>(width_, T{}), std::vector<T>(width_, T{})}; }

  std::span<const T> step(std::span<const T> x, State& state) const {
    if (x.size() != in_) throw ShapeError("Lstm::step: input width mismatch");
    if (state.h.size() != width_ || state.c.size() != width_) {
      throw ShapeError("Lstm::step: state width mismatch");
    }
    const std::size_t w = width_;
    std::vector<T> g(b_input_.begin(), b_input_.end());
    for (std::size_t j = 0; j < g.size(); ++j) g[j] += b_hidden_[j];
    matvec_accumulate<T>(w_input_, kGates * w, in_, x, g);
    matvec_accumulate<T>(w_hidden_, kGates * w, w, state.h, g);
    for (std::size_t j = 0; j < w; ++j) {
      const T i = sigmoid(g[j]);
      const T f = sigmoid(g[w + j]);
      const T cand = std::tanh(g[2 * w + j]);
      const T o = sigmoid(g[3 * w + j]);
      state.c[j] = f * state.c[j] + i * cand;
      state.h[j] = o * std::tanh(state.c[j]);
    }
    return state.h;
  }

 private:
  std::size_t in_ = 0;
  std::size_t width_ = 0;
  std::vector<T> w_input_;
  std::vector<T> w_hidden_;
  std::vector<T> b_input_;
  std::vector<T> b_hidden_;
};

// P disconnected recurrent cells over contiguous equal chunks of the input.
// Equivalent to one cell with block-diagonal weight matrices.
template <typename Cell>
class ParallelRnn {
 public:
  using Scalar = std::remove_cvref_t<decltype(std::declval<Cell>().input_weight()[0])>;
  using State = std::vector<typename Cell::State>;

  ParallelRnn() = default;
  ParallelRnn(std::size_t width, std::size_t groups) {
    if (groups == 0) throw ConfigError("ParallelRnn: groups must be positive");
    if (width % groups != 0) {
      throw ConfigError("ParallelRnn: width " + std::to_string(width) +
                        " not divisible by groups " + std::to_string(groups));
    }
    const std::size_t chunk = width / groups;
    cells_.assign(groups, Cell(chunk, chunk));
  }

  std::size_t groups() const { return cells_.size(); }
  std::size_t width() const { return cells_.empty() ? 0 : cells_.size() * cells_[0].width(); }
  Cell& group(std::size_t p) { return cells_[p]; }
  const Cell& group(std::size_t p) const { return cells_[p]; }

  std::vector<std::span<Scalar>> parameters() {
    std::vector<std::span<Scalar>> out;
    for (auto& cell : cells_) {
      for (auto s : cell.parameters()) out.push_back(s);
    }
    return out;
  }
  std::vector<std::span<const Scalar>> parameters() const {
    std::vector<std::span<const Scalar>> out;
    for (const auto& cell : cells_) {
      for (auto s : cell.parameters()) out.push_back(s);
    }
    return out;
  }

  State initial_state() const {
    State s;
    for (const auto& cell : cells_) s.push_back(cell.initial_state());
    return s;
  }

  std::vector<Scalar> step(std::span<const Scalar> x, State& state) const {
    if (x.size() != width()) {
      throw ShapeError("ParallelRnn::step: input length " + std::to_string(x.size()) +
                       " does not match " + std::to_string(groups()) + " groups of " +
                       std::to_string(cells_.empty() ? 0 : cells_[0].width()));
    }
    if (state.size() != cells_.size()) throw ShapeError("ParallelRnn::step: state group mismatch");
    const std::size_t chunk = cells_[0].width();
    std::vector<Scalar> y(x.size());
    for (std::size_t p = 0; p < cells_.size(); ++p) {
      const auto out = cells_[p].step(x.subspan(p * chunk, chunk), state[p]);
      std::copy(out.begin(), out.end(), y.begin() + static_cast<std::ptrdiff_t>(p * chunk));
    }
    return y;
  }

 private:
  std::vector<Cell> cells_;
};

}  // namespace cruse::nn
