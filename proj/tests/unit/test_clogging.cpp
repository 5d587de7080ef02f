#include <doctest.h>

#include <random>
#include <stdexcept>

#include "pipeflow/clogging.hpp"

using namespace pipeflow;

namespace {

std::vector<AlarmEventKind> run(const std::vector<Verdict>& verdicts, int debounce, int* fired_at = nullptr) {
  AlarmState s;
  s.debounce = debounce;
  std::vector<AlarmEventKind> events;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    const AlarmStep step = step_alarm(s, verdicts[i]);
    s = step.state;
    if (step.event) {
      events.push_back(*step.event);
      if (fired_at && *step.event == AlarmEventKind::Raised && *fired_at < 0) *fired_at = static_cast<int>(i) + 1;
    }
  }
  return events;
}

constexpr Verdict C = Verdict::Clogging;
constexpr Verdict N = Verdict::Normal;

} // namespace

TEST_SUITE("clogging") {

TEST_CASE("classification against the boundary") {
  const DecisionBoundary b;
  CHECK(b.velocity_at(100) == doctest::Approx(0.301));
  CHECK(classify(100, 0.32) == N);
  CHECK(classify(100, 0.25) == C);
  CHECK(classify(100, b.velocity_at(100)) == N);
  CHECK(classify(3, 0.0) == N); // boundary negative near the invert
  CHECK_THROWS_AS(classify(-1, 0.1), std::invalid_argument);
  CHECK_THROWS_AS((DecisionBoundary{0.0, 0.0}.validate()), std::invalid_argument);
}

TEST_CASE("classification is monotone") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lv(0, 250), vv(-0.2, 1.2), step(0, 0.3);
  for (int i = 0; i < 2000; ++i) {
    const double h = lv(rng), v = vv(rng), dv = step(rng), dh = 100 * step(rng);
    if (classify(h, v) == C) {
      CHECK(classify(h, v - dv) == C);
      CHECK(classify(h + dh, v) == C);
    }
  }
}

TEST_CASE("debounce traces") {
  int fired = -1;
  auto events = run({C, C, N, C, C, C}, 3, &fired);
  CHECK(fired == 6);
  CHECK(events == std::vector<AlarmEventKind>{AlarmEventKind::Raised});

  CHECK(run(std::vector<Verdict>(50, N), 5).empty());

  fired = -1;
  run({C}, 1, &fired);
  CHECK(fired == 1);

  AlarmState s;
  s.debounce = 2;
  s = step_alarm(s, C).state;
  CHECK(s.level == AlarmLevel::Suspect);
  s = step_alarm(s, C).state;
  CHECK(s.level == AlarmLevel::Alarm);
  const AlarmStep again = step_alarm(s, C);
  CHECK_FALSE(again.event);
  const AlarmStep cleared = step_alarm(again.state, N);
  CHECK(cleared.event == AlarmEventKind::Cleared);
  CHECK(cleared.state.level == AlarmLevel::Normal);
  CHECK(cleared.state.consecutive == 0);
}

TEST_CASE("raise and clear events alternate") {
  std::mt19937_64 rng(5);
  std::bernoulli_distribution clog(0.6);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Verdict> v(400);
    for (auto& x : v) x = clog(rng) ? C : N;
    const auto events = run(v, 1 + trial % 6);
    for (std::size_t i = 0; i < events.size(); ++i) {
      CHECK(events[i] == (i % 2 == 0 ? AlarmEventKind::Raised : AlarmEventKind::Cleared));
    }
  }
}

} // TEST_SUITE
