#include <cmath>

#include "tcal/microsim.hpp"

namespace tcal::sim {

std::size_t static_phase_at(const net::TlsProgram& program, double now) {
  const double cycle = program.cycle_time();
  if (program.phases.empty() || !(cycle > 0)) return 0;
  double t = std::fmod(now, cycle);
  if (t < 0) t += cycle;
  for (std::size_t i = 0; i < program.phases.size(); ++i) {
    if (t < program.phases[i].duration) return i;
    t -= program.phases[i].duration;
  }
  return program.phases.size() - 1;
}

TlsController::TlsController(const net::TlsProgram& program, double max_gap, double start)
    : program_(&program), max_gap_(max_gap), started_(start) {
  if (program.logic == net::TlsLogic::fixed) {
    phase_ = static_phase_at(program, start);
  }
}

bool TlsController::extendable(std::size_t phase) const {
  const auto& p = program_->phases[phase];
  return p.state.find('G') != std::string::npos && p.max_duration > p.min_duration;
}

char TlsController::signal(std::size_t approach) const noexcept {
  if (program_->phases.empty()) return 'G';
  const auto& state = program_->phases[phase_].state;
  return approach < state.size() ? state[approach] : 'G';
}

std::size_t TlsController::update(double now, std::span<const bool> occupied) {
  if (program_->phases.empty()) return 0;
  if (program_->logic == net::TlsLogic::fixed) {
    const std::size_t next = static_phase_at(*program_, now);
    if (next != phase_) {
      phase_ = next;
      started_ = now;
    }
    return phase_;
  }

  if (last_seen_.size() < occupied.size()) last_seen_.resize(occupied.size(), -kInf);
  for (std::size_t k = 0; k < occupied.size(); ++k) {
    if (occupied[k]) last_seen_[k] = now;
  }

  const auto& p = program_->phases[phase_];
  const double elapsed = now - started_;
  bool advance;
  if (!extendable(phase_)) {
    advance = elapsed >= p.duration;
  } else if (elapsed >= p.max_duration) {
    advance = true;
  } else if (elapsed < p.min_duration) {
    advance = false;
  } else {
    bool demand = false;
    for (std::size_t k = 0; k < last_seen_.size() && k < p.state.size(); ++k) {
      if (p.state[k] == 'G' && now - last_seen_[k] <= max_gap_) demand = true;
    }
    advance = !demand;
  }
  if (advance) {
    phase_ = (phase_ + 1) % program_->phases.size();
    started_ = now;
  }
  return phase_;
}

std::size_t tls_step(TlsController& controller, std::span<const bool> occupied, double now) {
  return controller.update(now, occupied);
}

}  // namespace tcal::sim
