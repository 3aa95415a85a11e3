// Simulates a short session, calibrates on its first six characters and
// spells the seventh flash by flash, printing the target's posterior under
// ASAP and under MDM+OM after every repetition.

#include "asap/asap.hpp"

#include <cstdio>

int main() {
  asap::SimConfig cfg;
  cfg.erp_amplitude = 1.0;
  cfg.n_repetitions = 6;
  cfg.seed = 11;
  const auto session = asap::generate_session(cfg, asap::random_targets(cfg, 7));

  const asap::PipelineConfig pipe;
  const auto trained = asap::train_on_session(session, pipe);
  const auto trials = asap::filtered_trials(session, pipe);
  const auto ep = asap::episodes(session).back();
  const int target = *ep.target;

  auto asap_state = asap::init_accumulator(session.L);
  auto om_state = asap::init_accumulator(session.L, asap::AccumulatorMode::OM);
  const int per_rep = asap::flashes_per_repetition(session);
  std::printf("target %d\nrep  p_target(ASAP)  best(ASAP)  p_target(OM)  best(OM)\n", target);
  for (std::size_t i = ep.begin; i < ep.end; ++i) {
    const auto feature = asap::extended_covariance(trials[i], trained.prototype, pipe.shrinkage);
    const auto d = asap::center_distances(trained.model, feature);
    const auto llh = asap::pmdm_log_likelihoods(trained.model, d);
    asap_state = asap::asap_update(std::move(asap_state), llh.T, llh.NT, trials[i].event.flashed);
    om_state = asap::om_update(std::move(om_state), asap::mdm_decide(d), trials[i].event.flashed);
    if ((i + 1 - ep.begin) % static_cast<std::size_t>(per_rep) == 0) {
      std::printf("%3zu  %14.4f  %10d  %12.4f  %8d\n", (i + 1 - ep.begin) / per_rep, asap_state.probability(target),
                  asap::decide(asap_state).character, om_state.probability(target), asap::decide(om_state).character);
    }
  }
  return 0;
}
