#include <catch2/catch_amalgamated.hpp>

#include "mgcheck/interaction.hpp"
#include "toy_specs.hpp"

using namespace mgcheck;

namespace {

ModuleSpec single_action_module(std::string module, std::set<std::string> reads,
                                std::map<std::string, WriteSpec> writes,
                                std::vector<VarDecl> decls) {
    ModuleSpec m;
    m.name = std::move(module);
    m.granularity = "baseline";
    m.declared_vars = std::move(decls);
    m.actions.push_back(toys::action(
        m.name + "_act", m.name, {}, std::move(reads), std::move(writes),
        [](const GuardCtx&) { return true; }, [](UpdateCtx&) {}));
    return m;
}

}  // namespace

TEST_CASE("dependency variables") {
    SECTION("guard TRUE writing a constant has no dependencies") {
        auto m = single_action_module("M", {}, {{"k", {{}, "k := 7"}}},
                                      {VarDecl("k", Value::integer(0))});
        CHECK(dependency_vars(m).empty());
    }
    SECTION("transitivity through assignment dependencies is forced") {
        auto m = single_action_module("M", {"x"}, {{"x", {{"y", "z"}, "x := y + z"}}},
                                      {VarDecl("x", Value::integer(0)),
                                       VarDecl("y", Value::integer(0)),
                                       VarDecl("z", Value::integer(0))});
        CHECK(dependency_vars(m) == std::set<std::string>{"x", "y", "z"});
    }
    SECTION("a copy into another module's guard variable stays out of D") {
        // The copy x := w is an interaction concern, not a local dependency.
        auto b = toys::copyprop_b("coarse");
        CHECK(dependency_vars(b) == std::set<std::string>{"x"});
    }
}

TEST_CASE("interaction variables") {
    SECTION("disjoint modules with constant assignments interact on nothing") {
        auto m1 = single_action_module("M1", {"a"}, {{"a", {{}, "a := 1"}}},
                                       {VarDecl("a", Value::integer(0))});
        auto m2 = single_action_module("M2", {"b"}, {{"b", {{}, "b := 1"}}},
                                       {VarDecl("b", Value::integer(0))});
        CHECK(interaction_vars({m1, m2}).empty());
    }
    SECTION("shared dependency variable plus copy source") {
        // A guards on x; B guards on x and assigns x := w.
        auto a = toys::copyprop_a();
        auto b = toys::copyprop_b("coarse");
        REQUIRE(dependency_vars(a) == std::set<std::string>{"x"});
        REQUIRE(dependency_vars(b) == std::set<std::string>{"x"});
        CHECK(interaction_vars({a, b}) == std::set<std::string>{"x", "w"});
    }
    SECTION("rule-1 conservatism: pairwise intersections always included") {
        std::vector<std::vector<ModuleSpec>> systems = {
            {toys::copyprop_a(), toys::copyprop_b("fine")},
            {toys::producer_module("fine"), toys::consumer_module()},
        };
        for (const auto& mods : systems) {
            auto inter = interaction_vars(mods);
            for (std::size_t i = 0; i < mods.size(); ++i)
                for (std::size_t j = i + 1; j < mods.size(); ++j) {
                    auto di = dependency_vars(mods[i]);
                    for (const auto& v : dependency_vars(mods[j]))
                        if (di.count(v)) CHECK(inter.count(v));
                }
        }
    }
    SECTION("fixpoint stability") {
        std::vector<ModuleSpec> mods = {toys::producer_module("fine"),
                                        toys::consumer_module()};
        auto once = interaction_vars(mods);
        auto twice = interaction_vars(mods);
        CHECK(once == twice);
    }
}

TEST_CASE("coarsening verdicts") {
    auto fine = toys::producer_module("fine");
    std::vector<ModuleSpec> context = {toys::consumer_module()};

    SECTION("identity coarsening is preserved") {
        auto v = check_interaction_preserving(fine, fine, context, "Consumer");
        CHECK(v.preserved);
        CHECK(v.violations.empty());
    }
    SECTION("the shipped coarse producer is preserved") {
        auto v = check_interaction_preserving(fine, toys::producer_module("coarse"), context,
                                              "Consumer");
        CHECK(v.preserved);
    }
    SECTION("dropping an update to an interaction variable is flagged") {
        auto v = check_interaction_preserving(fine, toys::producer_module("coarse-silent"),
                                              context, "Consumer");
        REQUIRE_FALSE(v.preserved);
        bool found = false;
        for (const auto& e : v.violations)
            if (e.rule == "updates-unchanged" && e.variable == "flag") found = true;
        CHECK(found);
    }
    SECTION("changing the copied expression is flagged") {
        auto v = check_interaction_preserving(toys::copyprop_b("fine"),
                                              toys::copyprop_b("coarse-wrong"),
                                              {toys::copyprop_a()}, "A");
        REQUIRE_FALSE(v.preserved);
        CHECK(v.violations[0].rule == "updates-unchanged");
        CHECK(v.violations[0].variable == "x");
    }
    SECTION("preconditions") {
        CHECK_THROWS_AS(
            check_interaction_preserving(fine, toys::consumer_module(), context, "Consumer"),
            SemanticError);
        CHECK_THROWS_AS(check_interaction_preserving(fine, toys::producer_module("coarse"),
                                                     context, "Producer"),
                        SemanticError);
        CHECK_THROWS_AS(check_interaction_preserving(fine, toys::producer_module("coarse"), {},
                                                     "Consumer"),
                        ClassificationMissingError);
    }
}

TEST_CASE("projection and condensation") {
    auto spec = toys::producer_consumer_spec("fine");
    std::vector<ModuleSpec> mods = {toys::producer_module("fine"), toys::consumer_module()};
    auto cls = classify(mods);

    SECTION("internal-only steps condense to a single state") {
        // Prepare touches only the producer-internal draft.
        Trace t;
        t.init = spec.init();
        auto enabled = enumerate_enabled(spec, t.init);
        REQUIRE(!enabled.empty());
        REQUIRE(enabled[0].name() == "Prepare");
        t.steps.emplace_back(enabled[0], apply(enabled[0], t.init));
        auto p = project_and_condense(t, spec, cls, "Consumer");
        CHECK(p.states.size() == 1);
    }
    SECTION("interaction-variable writes are all retained") {
        Trace t;
        t.init = spec.init();
        State cur = t.init;
        for (const char* name : {"Prepare", "Publish", "Consume", "Prepare", "Publish"}) {
            ActionInstance inst{spec.find_action(name), {}};
            cur = apply(inst, cur);
            t.steps.emplace_back(inst, cur);
        }
        auto p = project_and_condense(t, spec, cls, "Consumer");
        CHECK(p.states.size() == 4);  // flag false/true/false/true
        for (std::size_t i = 1; i < p.states.size(); ++i)
            CHECK(p.states[i] != p.states[i - 1]);
    }
}

TEST_CASE("theorem oracle") {
    std::vector<ModuleSpec> fine_mods = {toys::producer_module("fine"),
                                         toys::consumer_module()};
    auto cls = classify(fine_mods);

    SECTION("a spec is equivalent to itself") {
        auto full = toys::producer_consumer_spec("fine");
        auto r = theorem_oracle(full, full, "Consumer", cls);
        CHECK(r.outcome == TheoremResult::Outcome::Equivalent);
    }
    SECTION("correct coarsening is equivalent under exhaustive enumeration") {
        auto full = toys::producer_consumer_spec("fine");
        auto coarse = toys::producer_consumer_spec("coarse");
        auto r = theorem_oracle(full, coarse, "Consumer", cls);
        CHECK(r.outcome == TheoremResult::Outcome::Equivalent);
        CHECK(r.traces_full > 0);
        CHECK(r.traces_coarsened > 0);
    }
    SECTION("the silent coarsening yields a counterexample from the full side") {
        auto full = toys::producer_consumer_spec("fine");
        auto broken = toys::producer_consumer_spec("coarse-silent");
        auto r = theorem_oracle(full, broken, "Consumer", cls);
        REQUIRE(r.outcome == TheoremResult::Outcome::Counterexample);
        CHECK(r.witness_side == "full");
        REQUIRE(r.witness.has_value());
        CHECK(r.witness->states.size() >= 2);
    }
    SECTION("copy-propagation system: good and wrong coarsenings") {
        auto cls2 = classify({toys::copyprop_a(), toys::copyprop_b("fine")});
        auto full = toys::copyprop_spec("fine");
        CHECK(theorem_oracle(full, toys::copyprop_spec("coarse"), "A", cls2).outcome ==
              TheoremResult::Outcome::Equivalent);
        auto r = theorem_oracle(full, toys::copyprop_spec("coarse-wrong"), "A", cls2);
        REQUIRE(r.outcome == TheoremResult::Outcome::Counterexample);
        CHECK(r.witness_side == "full");
    }
    SECTION("budget exhaustion is reported") {
        TheoremBounds tight;
        tight.max_traces = 1;
        auto full = toys::producer_consumer_spec("fine");
        auto r = theorem_oracle(full, full, "Consumer", cls, tight);
        CHECK(r.outcome == TheoremResult::Outcome::BudgetExhausted);
    }
    SECTION("verdicts agree with the oracle on all toy cases") {
        struct Case {
            ModuleSpec orig, coarse;
            std::vector<ModuleSpec> ctx;
            std::string target;
            ComposedSpec full, composed;
        };
        std::vector<Case> cases;
        cases.push_back({toys::producer_module("fine"), toys::producer_module("coarse"),
                         {toys::consumer_module()},
                         "Consumer",
                         toys::producer_consumer_spec("fine"),
                         toys::producer_consumer_spec("coarse")});
        cases.push_back({toys::producer_module("fine"), toys::producer_module("coarse-silent"),
                         {toys::consumer_module()},
                         "Consumer",
                         toys::producer_consumer_spec("fine"),
                         toys::producer_consumer_spec("coarse-silent")});
        cases.push_back({toys::copyprop_b("fine"), toys::copyprop_b("coarse"),
                         {toys::copyprop_a()},
                         "A",
                         toys::copyprop_spec("fine"),
                         toys::copyprop_spec("coarse")});
        cases.push_back({toys::copyprop_b("fine"), toys::copyprop_b("coarse-wrong"),
                         {toys::copyprop_a()},
                         "A",
                         toys::copyprop_spec("fine"),
                         toys::copyprop_spec("coarse-wrong")});
        for (auto& c : cases) {
            auto verdict = check_interaction_preserving(c.orig, c.coarse, c.ctx, c.target);
            std::vector<ModuleSpec> mods = c.ctx;
            mods.push_back(c.orig);
            auto r = theorem_oracle(c.full, c.composed, c.target, classify(mods));
            INFO(c.orig.name << " coarsened to " << c.coarse.granularity);
            CHECK(verdict.preserved == (r.outcome == TheoremResult::Outcome::Equivalent));
        }
    }
}
