#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace safempd {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Caller broke an interface precondition (dimension or length mismatch).
struct ContractViolation : Error {
    using Error::Error;
};

/// A rollout produced a non-finite state.
struct NumericOverflowError : Error {
    int step_index;
    NumericOverflowError(const std::string& msg, int step)
        : Error(msg), step_index(step) {}
};

/// Bad configuration value (schedule range, scenario field, CLI flag).
struct ConfigError : Error {
    using Error::Error;
};

/// A rejection sampler ran out of attempts before collecting enough states.
struct SamplingExhausted : Error {
    using Error::Error;
};

/// Shielded rollout was handed an initial state outside the safe set.
struct InitialStateUnsafe : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Vec: fixed-capacity real vector for states and controls.
//
// Every shipped system fits in 8 entries, so rollouts never touch the heap.
// ---------------------------------------------------------------------------

class Vec {
public:
    static constexpr int kMaxDim = 8;

    Vec() = default;
    explicit Vec(int n, double fill = 0.0) : size_(n) {
        if (n < 0 || n > kMaxDim) throw ContractViolation("Vec: dimension out of range");
        for (int i = 0; i < n; ++i) v_[i] = fill;
    }
    Vec(std::initializer_list<double> xs) : size_(static_cast<int>(xs.size())) {
        if (size_ > kMaxDim) throw ContractViolation("Vec: dimension out of range");
        int i = 0;
        for (double x : xs) v_[i++] = x;
    }

    int size() const { return size_; }
    double operator[](int i) const { return v_[i]; }
    double& operator[](int i) { return v_[i]; }
    const double* data() const { return v_.data(); }
    double* data() { return v_.data(); }
    const double* begin() const { return v_.data(); }
    const double* end() const { return v_.data() + size_; }
    double* begin() { return v_.data(); }
    double* end() { return v_.data() + size_; }

    bool all_finite() const {
        for (int i = 0; i < size_; ++i)
            if (!std::isfinite(v_[i])) return false;
        return true;
    }

    double squared_norm() const {
        double s = 0.0;
        for (int i = 0; i < size_; ++i) s += v_[i] * v_[i];
        return s;
    }
    double norm() const { return std::sqrt(squared_norm()); }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < size_; ++i) v_[i] += o.v_[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < size_; ++i) v_[i] -= o.v_[i];
        return *this;
    }
    Vec& operator*=(double a) {
        for (int i = 0; i < size_; ++i) v_[i] *= a;
        return *this;
    }

    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(double a, Vec v) { return v *= a; }

    friend bool operator==(const Vec& a, const Vec& b) {
        if (a.size_ != b.size_) return false;
        for (int i = 0; i < a.size_; ++i)
            if (a.v_[i] != b.v_[i]) return false;
        return true;
    }

private:
    std::array<double, kMaxDim> v_{};
    int size_ = 0;
};

using State = Vec;
using Control = Vec;
using StateTrajectory = std::vector<State>;   // length T+1, index 0 = initial state
using ControlSequence = std::vector<Control>; // length T

// ---------------------------------------------------------------------------
// DynamicsModel: discrete-time transition contract.
// ---------------------------------------------------------------------------

/// Thread-local count of dynamics evaluations, for cost instrumentation.
std::uint64_t& dynamics_eval_counter();

class DynamicsModel {
public:
    virtual ~DynamicsModel() = default;

    virtual int state_dim() const = 0;
    virtual int control_dim() const = 0;
    virtual double dt() const = 0;
    virtual const Control& control_lower() const = 0;
    virtual const Control& control_upper() const = 0;

    /// One transition x' = f(x, u). Deterministic and total on finite inputs.
    State step(const State& x, const Control& u) const {
        ++dynamics_eval_counter();
        return do_step(x, u);
    }

protected:
    virtual State do_step(const State& x, const Control& u) const = 0;
};

// ---------------------------------------------------------------------------
// Rollout primitives
// ---------------------------------------------------------------------------

/// Clamp each control entry into the model's box bounds. Idempotent.
inline Control clamp_control(const Control& u, const DynamicsModel& model) {
    if (u.size() != model.control_dim())
        throw ContractViolation("clamp_control: control dimension mismatch");
    const Control& lo = model.control_lower();
    const Control& hi = model.control_upper();
    Control out = u;
    for (int i = 0; i < out.size(); ++i) {
        if (out[i] < lo[i]) out[i] = lo[i];
        else if (out[i] > hi[i]) out[i] = hi[i];
    }
    return out;
}

namespace detail {
inline void check_step_finite(const State& x, int t) {
    if (!x.all_finite())
        throw NumericOverflowError(
            "rollout: non-finite state at step " + std::to_string(t), t);
}
} // namespace detail

/// Closed-loop rollout: out = [x0, f(x0,pi(x0)), ...], length T+1.
/// The policy is invoked exactly once per step, in time order, and its
/// output is clamped before stepping.
template <class Policy>
void rollout_into(StateTrajectory& out, const State& x0, Policy&& policy, int T,
                  const DynamicsModel& model) {
    if (T < 0) throw ContractViolation("rollout: negative horizon");
    if (x0.size() != model.state_dim())
        throw ContractViolation("rollout: state dimension mismatch");
    out.resize(static_cast<std::size_t>(T) + 1);
    out[0] = x0;
    State x = x0;
    for (int t = 0; t < T; ++t) {
        Control u = clamp_control(policy(x), model);
        x = model.step(x, u);
        detail::check_step_finite(x, t);
        out[static_cast<std::size_t>(t) + 1] = x;
    }
}

template <class Policy>
StateTrajectory rollout(const State& x0, Policy&& policy, int T,
                        const DynamicsModel& model) {
    StateTrajectory out;
    rollout_into(out, x0, std::forward<Policy>(policy), T, model);
    return out;
}

/// Open-loop rollout of a fixed control sequence.
StateTrajectory rollout_controls(const State& x0, const ControlSequence& seq,
                                 const DynamicsModel& model);
void rollout_controls_into(StateTrajectory& out, const State& x0,
                           const ControlSequence& seq, const DynamicsModel& model);

} // namespace safempd
