// Scaled block atoms of one CRP run, then the mean atom count in a window
// over many runs next to the limiting intensity mass.
//
//   ./first_blocks [theta] [n] [seed]

#include <cstdint>
#include <cstdio>
#include <cstdlib>

#include "crpx/crpx.hpp"

int main(int argc, char** argv) {
  const double theta = argc > 1 ? std::atof(argv[1]) : 1.0;
  const std::uint64_t n = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 100000;
  const std::uint64_t seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 7;

  crpx::TrackerConfig trackers;
  trackers.n_max = 2;
  const auto obs = crpx::run(crpx::CrpParams{theta, seed, 2 * n}, trackers);
  const auto xi = crpx::extract_point_measure(obs, 1, n);

  std::printf("theta=%g n=%llu: %zu blocks got a second customer by step 2n\n", theta,
              static_cast<unsigned long long>(n), xi.size());
  std::printf("%12s %12s\n", "k1/n", "m/n");
  for (const auto& a : xi.atoms)
    if (a.y > 0.01) std::printf("%12.6f %12.6f\n", a.x[0], a.y);

  // (0, 1] x (1, 2]: blocks opened before n whose second customer came in (n, 2n]
  const crpx::ConeWindow w{{crpx::Interval{0.0, 1.0}}, crpx::Interval{1.0, 2.0}};
  const int reps = 400;
  double total = 0.0;
  for (int r = 0; r < reps; ++r) {
    const auto o = crpx::run(crpx::CrpParams{theta, crpx::derive_seed(seed, {static_cast<std::uint64_t>(r)}), 2 * n},
                             crpx::TrackerConfig{});
    total += static_cast<double>(crpx::count_atoms(o.atoms(1), w, n));
  }
  std::printf("\nwindow (0,1]x(1,2]: mean count %.4f over %d runs, limit mass %.4f\n", total / reps, reps,
              crpx::intensity::mass(w, theta));
}
