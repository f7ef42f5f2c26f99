#include "safempd/core.hpp"

namespace safempd {

std::uint64_t& dynamics_eval_counter() {
    thread_local std::uint64_t count = 0;
    return count;
}

void rollout_controls_into(StateTrajectory& out, const State& x0,
                           const ControlSequence& seq, const DynamicsModel& model) {
    if (seq.empty()) throw ContractViolation("rollout_controls: empty control sequence");
    if (x0.size() != model.state_dim())
        throw ContractViolation("rollout_controls: state dimension mismatch");
    const int T = static_cast<int>(seq.size());
    out.resize(static_cast<std::size_t>(T) + 1);
    out[0] = x0;
    State x = x0;
    for (int t = 0; t < T; ++t) {
        Control u = clamp_control(seq[static_cast<std::size_t>(t)], model);
        x = model.step(x, u);
        detail::check_step_finite(x, t);
        out[static_cast<std::size_t>(t) + 1] = x;
    }
}

StateTrajectory rollout_controls(const State& x0, const ControlSequence& seq,
                                 const DynamicsModel& model) {
    StateTrajectory out;
    rollout_controls_into(out, x0, seq, model);
    return out;
}

} // namespace safempd
