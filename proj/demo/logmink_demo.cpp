// Solves h det(Hess h + h I) = f for one seeded density, cross-checks the
// solution against the curvature flow and prints the body's anisotropy.

#include <cstdio>

#include "logmink/ellipsoid.hpp"
#include "logmink/experiments.hpp"
#include "logmink/gcf_flow.hpp"
#include "logmink/ma_solver.hpp"
#include "logmink/support.hpp"

int main() {
  using namespace logmink;
  auto grid = build_grid(16);
  DensityFunction f = gen_density(42, 0.2, 2.0, grid);
  std::printf("density: %.4f <= f <= %.4f, holder proxy %.4f\n", f.values().minCoeff(), f.values().maxCoeff(),
              f.holder_proxy());

  SolveResult newton = newton_solve(f);
  for (const auto& row : newton.report.history)
    std::printf("  newton iter %d  residual %.3e  step %.3g\n", row.iter, row.residual_sup, row.step_size);

  FlowResult flow = run_flow(f, SupportFunction::constant(grid, 1.0));
  std::printf("flow: %ld steps to t = %.3f, distance to Newton %.2e\n", flow.steps, flow.t,
              hausdorff_distance(flow.h, newton.h));

  std::printf("volume %.10f, (1/3) int f = %.10f\n", volume_from_support(newton.h), integrate(f.field()) / 3.0);
  BlowdownDiagnostics d = blowdown_diagnostics(polytope_from_support(newton.h));
  std::printf("ellipsoid radii %.4f %.4f %.4f, r3/r2 = %.4f, r2/r1 = %.4f\n", d.ellipsoid.radii[0], d.ellipsoid.radii[1],
              d.ellipsoid.radii[2], d.ratio_32, d.ratio_21);
  return 0;
}
