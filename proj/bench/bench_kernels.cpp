// Timing comparison of the serial reference kernels against their OpenMP
// counterparts: meter sampling (position and momentum) and the randomized
// verification sweep. Both paths draw from the same chunk substreams, so
// the outputs are identical; only the wall time differs.

#include "weakval/ensembles.hpp"
#include "weakval/meter_sim.hpp"
#include "weakval/verify.hpp"

#include <omp.h>

#include <cstdio>

using namespace weakval;

namespace {

template <typename Fn>
double time_once(Fn&& fn) {
    double start = omp_get_wtime();
    fn();
    return omp_get_wtime() - start;
}

void report(const char* name, double serial, double parallel) {
    std::printf("%-28s serial %8.3f s   openmp %8.3f s   speedup %.2fx\n", name, serial,
                parallel, serial / parallel);
}

}  // namespace

int main() {
    std::printf("threads: %d\n", omp_get_max_threads());

    RngStream rng(2718);
    const int d = 4;
    Scenario s = random_scenario(d, StateFlavor::Pure, MeasurementFlavor::Projective, rng);

    MeterConfig cfg;
    cfg.sigma_x = 0.5;
    cfg.coupling = 0.05;
    cfg.samples = 4'000'000;
    cfg.seed = 99;

    MeterReadout pos_serial, pos_parallel;
    double t_pos_serial = time_once([&] {
        pos_serial = simulate_position_readout(s.state, s.measurement, s.generator, cfg,
                                               ExecutionPolicy::Serial);
    });
    double t_pos_parallel = time_once([&] {
        pos_parallel = simulate_position_readout(s.state, s.measurement, s.generator, cfg,
                                                 ExecutionPolicy::Parallel);
    });
    report("position readout (4M)", t_pos_serial, t_pos_parallel);
    for (std::size_t m = 0; m < pos_serial.outcomes.size(); ++m)
        if (pos_serial.outcomes[m].mean != pos_parallel.outcomes[m].mean)
            std::printf("  MISMATCH at outcome %zu\n", m);

    MeterReadout mom_serial, mom_parallel;
    double t_mom_serial = time_once([&] {
        mom_serial = simulate_momentum_readout(s.state, s.measurement, s.generator, cfg,
                                               ExecutionPolicy::Serial);
    });
    double t_mom_parallel = time_once([&] {
        mom_parallel = simulate_momentum_readout(s.state, s.measurement, s.generator, cfg,
                                                 ExecutionPolicy::Parallel);
    });
    report("momentum readout (4M)", t_mom_serial, t_mom_parallel);
    for (std::size_t m = 0; m < mom_serial.outcomes.size(); ++m)
        if (mom_serial.outcomes[m].mean != mom_parallel.outcomes[m].mean)
            std::printf("  MISMATCH at outcome %zu\n", m);

    VerifyOptions vopts;
    vopts.dims = {2, 3, 4, 5, 6};
    vopts.trials = 400;
    vopts.seed = 31;
    vopts.parallel = false;
    double t_ver_serial = time_once([&] { run_verification(vopts); });
    vopts.parallel = true;
    double t_ver_parallel = time_once([&] { run_verification(vopts); });
    report("verification sweep (400)", t_ver_serial, t_ver_parallel);

    return 0;
}
