#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>

#include "ica/curvature.hpp"
#include "ica/errors.hpp"
#include "ica/instance.hpp"
#include "ica/json_io.hpp"

using namespace ica;

namespace {

std::filesystem::path fixture(const char* name) {
  return std::filesystem::path(ICA_FIXTURE_DIR) / name;
}

std::string validation_path(const std::function<void()>& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    return e.path();
  }
  return "<no error>";
}

}  // namespace

TEST(Instance, LoadsFixture) {
  const Instance inst = load_instance(fixture("two_agent_budget.json"));
  EXPECT_EQ(inst.agents(), 2u);
  EXPECT_EQ(inst.items(), 4u);
  EXPECT_EQ(inst.valuation(1), Valuation::budget(1.5));
  EXPECT_DOUBLE_EQ(inst.utility(1, 2), 0.75);
  EXPECT_DOUBLE_EQ(inst.max_utility(0), 1.0);
  EXPECT_DOUBLE_EQ(inst.total_weight(), 2.0);
  EXPECT_TRUE(inst.warnings().empty());
}

TEST(Instance, RowOfWrongLengthNamesRow) {
  EXPECT_EQ(validation_path([] { load_instance(fixture("bad_row.json")); }), "utilities[1]");
}

TEST(Instance, BadValuationNamesField) {
  EXPECT_EQ(validation_path([] { load_instance(fixture("bad_cap.json")); }),
            "agents[0].valuation.cap");
}

TEST(Instance, MalformedFileNamesFile) {
  const std::string p = validation_path([] { load_instance(fixture("truncated.json")); });
  EXPECT_NE(p.find("truncated.json"), std::string::npos);
}

TEST(Instance, RejectsBadUtilities) {
  const Agent a{Valuation::linear(1.0), 1.0};
  EXPECT_EQ(validation_path([&] { Instance({a}, 2, {{1.0, -0.5}}); }), "utilities[0][1]");
  EXPECT_EQ(validation_path([&] { Instance({a}, 2, {{1.0, std::nan("")}}); }),
            "utilities[0][1]");
  EXPECT_EQ(validation_path([&] { Instance({a}, 1, {{1.0}, {1.0}}); }), "utilities");
  EXPECT_EQ(validation_path([&] { Instance({Agent{Valuation::linear(1.0), 0.0}}, 1, {{1.0}}); }),
            "agents[0].weight");
}

TEST(Instance, WarnsOnSoftProblems) {
  const Instance unvalued({Agent{Valuation::linear(1.0), 1.0}}, 2, {{1.0, 0.0}});
  ASSERT_EQ(unvalued.warnings().size(), 1u);
  EXPECT_NE(unvalued.warnings()[0].find("item[1]"), std::string::npos);

  const Instance short_segment({Agent{Valuation::piecewise({0, 0.5}, {2, 1}), 1.0}}, 1, {{1.0}});
  EXPECT_FALSE(short_segment.warnings().empty());
}

TEST(Instance, JsonRoundTripIsExact) {
  for (std::string_view fam : kRandomFamilies) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const Instance inst = gen_random(3, 5, fam, seed, 0.5);
      const Instance back = instance_from_json(Json::parse(to_json(inst).dump()));
      EXPECT_EQ(inst, back) << fam << " " << seed;
    }
  }
  const auto path = std::filesystem::temp_directory_path() / "ica_roundtrip.json";
  const Instance inst = gen_random(2, 4, "piecewise", 9);
  save_instance(inst, path);
  EXPECT_EQ(load_instance(path), inst);
  std::filesystem::remove(path);
}

TEST(Allocation, JsonAndUtilities) {
  const Instance inst = load_instance(fixture("two_agent_budget.json"));
  const Allocation a = allocation_from_json(Json::parse(R"({"owner":[0,1,0,null]})"));
  ASSERT_EQ(a.owner.size(), 4u);
  EXPECT_FALSE(a.owner[3].has_value());
  EXPECT_EQ(allocation_from_json(to_json(a)), a);
  const auto u = agent_utilities(inst, a);
  EXPECT_DOUBLE_EQ(u[0], 1.25);
  EXPECT_DOUBLE_EQ(u[1], 1.0);
  EXPECT_DOUBLE_EQ(utilitarian_welfare(inst, a), 2.0);
  EXPECT_THROW(validate_allocation(inst, Allocation{{0, 1}}), ValidationError);
  EXPECT_THROW(validate_allocation(inst, Allocation{{0, 1, 2, 0}}), ValidationError);
}

TEST(GenRandom, Deterministic) {
  EXPECT_EQ(gen_random(2, 4, "budget", 7), gen_random(2, 4, "budget", 7));
  EXPECT_FALSE(gen_random(2, 4, "budget", 7) == gen_random(2, 4, "budget", 8));
}

TEST(GenRandom, SingleLinear) {
  const Instance inst = gen_random(1, 1, "linear", 1);
  EXPECT_GT(inst.utility(0, 0), 0.0);
  EXPECT_LE(inst.utility(0, 0), 1.0);
}

TEST(GenRandom, PiecewiseRespectsSegmentLength) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Instance inst = gen_random(3, 6, "piecewise", seed);
    for (std::size_t i = 0; i < inst.agents(); ++i) {
      const auto k = inst.valuation(i).kinks();
      for (std::size_t s = 0; s + 1 < k.size(); ++s) {
        EXPECT_LE(inst.max_utility(i), k[s + 1] - k[s]) << seed;
      }
    }
    EXPECT_TRUE(inst.warnings().empty());
  }
}

TEST(GenRandom, FamilyConstraints) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Instance b = gen_random(3, 6, "budget", seed);
    for (std::size_t i = 0; i < b.agents(); ++i) {
      EXPECT_EQ(b.valuation(i).family_name(), "budget");
      EXPECT_GE(mult_curvature(b.valuation(i), b.max_utility(i)).value, 1.0);
    }
    const Instance s = gen_random(2, 3, "smooth_log", seed, 0.25);
    for (std::size_t i = 0; i < s.agents(); ++i) {
      EXPECT_EQ(s.valuation(i), Valuation::smooth_log(s.weight(i), 0.25));
    }
  }
  EXPECT_THROW(gen_random(1, 1, "cubic", 1), ValidationError);
}

TEST(BestRational, Examples) {
  EXPECT_EQ(best_rational(0.5, 64), std::make_pair(1L, 2L));
  EXPECT_EQ(best_rational(1.0 / 3.0, 64), std::make_pair(1L, 3L));
  EXPECT_EQ(best_rational(M_PI, 10), std::make_pair(22L, 7L));
  EXPECT_EQ(best_rational(M_PI, 200), std::make_pair(355L, 113L));
  EXPECT_EQ(best_rational(0.0, 8), std::make_pair(0L, 1L));
}

TEST(BestRational, IsBestWithinDenominator) {
  for (double x : {0.1234, 0.7071067811865476, 0.4427, 0.999, 0.001}) {
    for (long maxden : {1L, 5L, 16L, 64L}) {
      const auto [p, q] = best_rational(x, maxden);
      ASSERT_LE(q, maxden);
      const double err = std::abs(x - static_cast<double>(p) / q);
      for (long d = 1; d <= maxden; ++d) {
        const double n = std::round(x * d);
        EXPECT_LE(err, std::abs(x - n / d) + 1e-15) << x << " " << maxden << " " << d;
      }
    }
  }
}

TEST(GapInstance, BudgetCapTwoWidthTwo) {
  const GapInstance g = gen_gap_instance(Valuation::budget(2.0), 2.0);
  const GapInstanceSpec& s = g.spec;
  EXPECT_DOUBLE_EQ(s.z, 1.0);
  EXPECT_DOUBLE_EQ(s.zstar, 1.0);
  EXPECT_EQ(s.beta, 1);
  EXPECT_EQ(s.gamma, 2);
  EXPECT_EQ(g.instance.agents(), 2u);
  ASSERT_EQ(g.instance.items(), 3u);
  EXPECT_EQ(g.instance.utilities(), (Matrix{{2, 1, 0}, {2, 0, 1}}));
  EXPECT_DOUBLE_EQ(s.opt_fractional, 4.0);
  EXPECT_DOUBLE_EQ(s.opt_integral, 3.0);
}

TEST(GapInstance, LinearHasNoGap) {
  try {
    gen_gap_instance(Valuation::linear(1.0), 1.0);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("mu=1"), std::string::npos);
  }
}

TEST(GapInstance, BudgetCapTwoWidthOne) {
  const GapInstance g = gen_gap_instance(Valuation::budget(2.0), 1.0);
  const double mu = mult_curvature(Valuation::budget(2.0), 1.0).value;
  EXPECT_NEAR(g.spec.opt_fractional / g.spec.opt_integral, mu, 1e-6);
  EXPECT_DOUBLE_EQ(g.spec.mu, mu);
}

TEST(GapInstance, StructuralInvariants) {
  for (double c : {1.0, 1.5, 2.0, 3.0}) {
    for (double u : {0.4, 0.7, 1.0}) {
      const Valuation v = Valuation::budget(c);
      const GapInstance g = gen_gap_instance(v, u * c, 32);
      const GapInstanceSpec& s = g.spec;
      const Instance& inst = g.instance;
      ASSERT_EQ(inst.agents(), static_cast<std::size_t>(s.gamma));
      EXPECT_LE(s.gamma, 32);
      EXPECT_GT(s.beta, 0);
      EXPECT_LT(s.beta, s.gamma);
      double top = 0.0;
      for (std::size_t i = 0; i < inst.agents(); ++i) {
        EXPECT_EQ(inst.valuation(i), v);
        for (long j = 0; j < s.beta; ++j) EXPECT_DOUBLE_EQ(inst.utility(i, j), s.width);
        double priv = 0.0;
        std::size_t owned = 0;
        for (std::size_t j = s.beta; j < inst.items(); ++j) {
          priv += inst.utility(i, j);
          owned += inst.utility(i, j) > 0.0;
        }
        EXPECT_NEAR(priv, s.z, 1e-12);
        EXPECT_EQ(owned, s.private_full + (s.remainder > 0.0));
        top = std::max(top, inst.max_utility(i));
      }
      EXPECT_DOUBLE_EQ(top, s.width);
      EXPECT_NEAR(s.opt_fractional, s.gamma * v.value(s.t_rational), 1e-12);
      EXPECT_NEAR(s.opt_integral,
                  s.beta * v.value(s.z + s.width) + (s.gamma - s.beta) * v.value(s.z), 1e-12);
    }
  }
}

TEST(GapInstance, SpecJsonCarriesCounts) {
  const Json j = to_json(gen_gap_instance(Valuation::budget(2.0), 2.0).spec);
  EXPECT_EQ(j.at("beta"), 1);
  EXPECT_EQ(j.at("gamma"), 2);
  EXPECT_EQ(j.at("valuation").at("family"), "budget");
}
