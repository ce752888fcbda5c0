#include <benchmark/benchmark.h>

#include "nstamp/pddl.hpp"

namespace {

using namespace nstamp::pddl;

void BM_PlanDisassembly(benchmark::State& state) {
  const Domain& domain = disassembly_domain();
  const GroundState init{"have_coarse_pose"};
  const std::vector<Literal> goal{pos("disassembled")};
  for (auto _ : state) {
    auto p = plan(init, goal, domain.actions);
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(BM_PlanDisassembly);

void BM_PlanRecovery(benchmark::State& state) {
  const Domain& domain = disassembly_domain();
  const GroundState init{"pattern", "near_screw", "have_coarse_pose"};
  const std::vector<Literal> goal{pos("disassembled")};
  for (auto _ : state) {
    auto p = plan(init, goal, domain.actions);
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(BM_PlanRecovery);

void BM_ParseDomain(benchmark::State& state) {
  const auto text = disassembly_domain_text();
  for (auto _ : state) {
    auto d = parse_domain(text);
    benchmark::DoNotOptimize(d);
  }
}
BENCHMARK(BM_ParseDomain);

}  // namespace
