// Serial vs OpenMP kernels on a dense network.
//
//   bench_kernels [sources] [targets] [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "advot/kernels.hpp"
#include "advot/model.hpp"
#include "advot/otsolve.hpp"

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
double time_ms(int repeats, F&& f) {
  const auto t0 = Clock::now();
  for (int r = 0; r < repeats; ++r) f();
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count() / repeats;
}

void report(const char* name, double serial, double parallel, bool same) {
  std::printf("%-18s serial %9.3f ms  parallel %9.3f ms  speedup %5.2fx  %s\n", name, serial,
              parallel, serial / parallel, same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t ns = argc > 1 ? std::stoul(argv[1]) : 2000;
  const std::size_t nt = argc > 2 ? std::stoul(argv[2]) : 2000;
  const int repeats = argc > 3 ? std::stoi(argv[3]) : 10;

  std::vector<std::string> sources, targets;
  for (std::size_t j = 0; j < ns; ++j) sources.push_back("s" + std::to_string(j));
  for (std::size_t q = 0; q < nt; ++q) targets.push_back("t" + std::to_string(q));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  std::vector<double> caps(ns);
  for (double& c : caps) c = 1.0 + u(rng);
  const auto net = advot::fully_connected(sources, targets, caps);

  const std::size_t ne = net.num_edges();
  std::vector<double> w(ne), punishment(ne), prices(ns);
  for (double& v : w) v = u(rng);
  for (double& v : punishment) v = 1.0 + u(rng);
  for (double& v : prices) v = u(rng);

  const advot::kernels::NetworkView view{net.edge_sources(), net.row_offsets()};
  std::printf("network %zu x %zu (%zu edges), %d OpenMP threads, %d repeats\n", ns, nt, ne,
              advot::kernels::parallel::max_threads(), repeats);

  namespace ks = advot::kernels::serial;
  namespace kp = advot::kernels::parallel;

  std::vector<double> xs(ne), xp(ne);
  const double t_ps = time_ms(repeats, [&] { ks::primal_update(w, prices, view, 3.0, xs); });
  const double t_pp = time_ms(repeats, [&] { kp::primal_update(w, prices, view, 3.0, xp); });
  report("primal_update", t_ps, t_pp, xs == xp);

  std::vector<double> ss(ns), sp(ns);
  const double t_rs = time_ms(repeats, [&] { ks::row_sums(xs, view, ss); });
  const double t_rp = time_ms(repeats, [&] { kp::row_sums(xs, view, sp); });
  report("row_sums", t_rs, t_rp, ss == sp);

  std::vector<double> ps = prices, pp = prices;
  const double t_ds = time_ms(repeats, [&] { ks::dual_update(ps, ss, caps, 0.05); });
  const double t_dp = time_ms(repeats, [&] { kp::dual_update(pp, ss, caps, 0.05); });
  report("dual_update", t_ds, t_dp, ps == pp);

  std::vector<double> as(nt), fs(nt), ap(nt), fp(nt);
  const double t_as = time_ms(repeats, [&] {
    ks::target_aggregates(xs, punishment, 0.5, net.incoming_offsets(), net.incoming_edges(), as,
                          fs);
  });
  const double t_ap = time_ms(repeats, [&] {
    kp::target_aggregates(xs, punishment, 0.5, net.incoming_offsets(), net.incoming_edges(), ap,
                          fp);
  });
  report("target_aggregates", t_as, t_ap, as == ap && fs == fp);

  advot::SolverSettings settings;
  settings.max_iter = 200;
  settings.tol = 1e-300;  // run the full iteration budget
  const advot::PerceptionWeights weights{w};
  advot::SolveReport rs, rp;
  settings.exec = advot::ExecutionMode::Serial;
  const double t_ss = time_ms(1, [&] { rs = advot::solve_regularized_ot(net, weights, settings); });
  settings.exec = advot::ExecutionMode::Parallel;
  const double t_sp = time_ms(1, [&] { rp = advot::solve_regularized_ot(net, weights, settings); });
  report("solve (200 iter)", t_ss, t_sp, rs.plan == rp.plan && rs.prices == rp.prices);
  return 0;
}
