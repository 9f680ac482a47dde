// Builds the Brownian-unitary net for 2 id on a small F, then the expansive
// approximant of diag(2, 3), and prints what each one looks like.

#include <cstdio>
#include <memory>

#include "twoiso/twoiso.hpp"

using namespace twoiso;

int main() {
  constexpr std::size_t n = 3;
  auto space = std::make_shared<AmbientSpace>(256);
  space->allocate_labeled("H", 2 * n);
  std::vector<Vector> f;
  for (std::size_t i = 0; i < n; ++i) f.push_back(Vector::unit(2 * n, i));

  auto net = theorem1_construct(f, space);
  auto& b = net.block;
  std::printf("brownian net, dim F = %zu\n", n);
  std::printf("  epsilon       %.6f\n", net.trace.epsilon);
  std::printf("  sigma         %.6f\n", net.trace.sigmas.front());
  std::printf("  ||I_F||       %.6f\n", b.operator_norm());

  Rng rng(1);
  const Vector x = rng.unit_vector_in(net.trace.x);
  std::printf("  ||(I_F - 2)x|| %.6f  (1/n = %.6f)\n", norm(b.apply(x) - 2.0 * x), 1.0 / n);

  const Vector y = rng.unit_vector(space->next_free(), space->id());
  const std::size_t before = space->next_free();
  std::printf("  d2(y)         %.3e\n", defect_form(b, y, 2));
  std::printf("  lazy coords   %zu -> %zu\n", before, space->next_free());

  const DenseOperator t(DenseMatrix{{2.0, 0.0}, {0.0, 3.0}});
  auto h4 = std::make_shared<AmbientSpace>(512);
  const std::vector<Vector> f2{Vector{1.0, 0.0}, Vector{0.0, 1.0}};
  auto res = theorem2_construct(t, f2, h4);
  const auto& c = res.certificate;
  std::printf("\nexpansive approximant of diag(2, 3), dim F = 2\n");
  for (std::size_t i = 0; i < res.trace.n; ++i) {
    std::printf("  x_%zu: ||T x|| = %.4f  sigma = %.6f\n", i, res.trace.norms_Tx[i], res.trace.sigmas[i]);
  }
  std::printf("  bound         %.6f <= %.6f\n", c.bound_measured, c.bound_theoretical);
  std::printf("  defect        %.3e (relative)\n", c.defect_report.relative());
  std::printf("  expansivity   %.12f\n", c.expansivity_min);
  std::printf("  certificate   %s\n", c.passed() ? "passed" : "FAILED");
  return c.passed() ? 0 : 1;
}
