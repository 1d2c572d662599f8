// A draw of the limiting N=1 atoms on [0.05, 3] with the paths X_1 and L,
// and the two exact oracles on a small tuple family.

#include <cstdio>

#include "crpx/crpx.hpp"

int main() {
  const double theta = 1.0;
  crpx::Stream rng(crpx::derive_seed(5, {crpx::name_id("demo")}));
  const auto sample = crpx::limit::sample_xi(crpx::intensity::window_covering(0.05, 3.0), theta, rng);

  std::printf("%zu atoms\n", sample.atoms.size());
  const std::vector<double> ts{0.25, 0.5, 1.0, 1.5, 2.0, 3.0};
  const auto x1 = crpx::limit::path_X1(sample.atoms, ts);
  const auto l = crpx::limit::path_L(sample.atoms, ts);
  std::printf("%6s %4s %10s\n", "t", "X1", "L");
  for (std::size_t i = 0; i < ts.size(); ++i) std::printf("%6.2f %4llu %10.5f\n", ts[i], static_cast<unsigned long long>(x1[i]), l[i]);

  crpx::oracle::TupleFamily family{{crpx::BlockAtom{{3, 7, 11}, 19}, crpx::BlockAtom{{6, 12, 21}, 24}}, 1.0};
  const auto joint = crpx::oracle::joint_probability(family);
  const auto step = crpx::oracle::stepwise_probability(family);
  std::printf("\njoint %.10e  stepwise %.10e\n", joint.value, step.value);
}
