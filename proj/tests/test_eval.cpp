#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "micon/errors.hpp"
#include "micon/eval.hpp"
#include "micon/rng.hpp"

using micon::EvalError;
using micon::math::Matrix;
using micon::math::SplitRng;
using namespace micon::eval;

namespace {

WellEmbedding mk(const std::string& source, const std::string& batch, const std::string& plate,
                 int row, int col, const std::string& pert, std::vector<double> v) {
    WellEmbedding e;
    e.source_id = source;
    e.batch_id = batch;
    e.plate_id = plate;
    e.row = row;
    e.col = col;
    e.perturbation_id = pert;
    e.vec = std::move(v);
    return e;
}

micon::data::WellRecord well_meta(const std::string& pert) {
    micon::data::WellRecord w;
    w.source_id = "S0";
    w.batch_id = "B0";
    w.plate_id = "P0";
    w.row = 1;
    w.col = 2;
    w.perturbation_id = pert;
    return w;
}

}  // namespace

TEST_CASE("well aggregation is the FOV mean") {
    Matrix reps(2, 2);
    reps(0, 0) = 1.0;
    reps(1, 1) = 1.0;
    const WellEmbedding e = aggregate_well(well_meta("CPD-001"), reps);
    CHECK(e.vec == std::vector<double>{0.5, 0.5});
    CHECK(e.key() == "S0|B0|P0|1|2");

    Matrix one(1, 3);
    one(0, 0) = 3.0;
    one(0, 1) = -1.0;
    one(0, 2) = 0.25;
    const WellEmbedding s = aggregate_well(well_meta("DMSO"), one);
    CHECK(s.vec == std::vector<double>{3.0, -1.0, 0.25});
    CHECK(s.is_control());

    // permutation of FOVs changes nothing
    Matrix fwd(3, 2), rev(3, 2);
    SplitRng rng(1);
    for (size_t i = 0; i < fwd.size(); ++i) fwd.data[i] = rng.gaussian();
    for (size_t r = 0; r < 3; ++r)
        for (size_t c = 0; c < 2; ++c) rev(r, c) = fwd(2 - r, c);
    const auto a = aggregate_well(well_meta("x"), fwd);
    const auto b = aggregate_well(well_meta("x"), rev);
    for (size_t j = 0; j < 2; ++j) CHECK(a.vec[j] == doctest::Approx(b.vec[j]).epsilon(1e-15));
}

TEST_CASE("MAD normalization") {
    SUBCASE("hand case: controls (1,2,3), input 4 maps to 2") {
        std::vector<WellEmbedding> wells = {
            mk("S", "B", "P", 0, 0, "DMSO", {1.0}),
            mk("S", "B", "P", 0, 1, "DMSO", {2.0}),
            mk("S", "B", "P", 0, 2, "DMSO", {3.0}),
            mk("S", "B", "P", 0, 3, "CPD", {4.0}),
        };
        mad_normalize(wells);
        CHECK(wells[3].vec[0] == doctest::Approx(2.0).epsilon(1e-12));  // (4-2)/1
        // control median lands exactly on zero
        CHECK(wells[1].vec[0] == 0.0);
    }
    SUBCASE("constant controls saturate at the epsilon divisor") {
        std::vector<WellEmbedding> wells = {
            mk("S", "B", "P", 0, 0, "DMSO", {5.0}),
            mk("S", "B", "P", 0, 1, "DMSO", {5.0}),
            mk("S", "B", "P", 0, 2, "CPD", {5.5}),
        };
        mad_normalize(wells);
        CHECK(wells[2].vec[0] == doctest::Approx(0.5 / 1e-6).epsilon(1e-9));
    }
    SUBCASE("controls symmetric about zero leave zero fixed") {
        std::vector<WellEmbedding> wells = {
            mk("S", "B", "P", 0, 0, "DMSO", {-2.0}),
            mk("S", "B", "P", 0, 1, "DMSO", {2.0}),
            mk("S", "B", "P", 0, 2, "CPD", {0.0}),
        };
        mad_normalize(wells);
        CHECK(wells[2].vec[0] == 0.0);
    }
    SUBCASE("plate without two controls is rejected") {
        std::vector<WellEmbedding> wells = {
            mk("S", "B", "P", 0, 0, "DMSO", {1.0}),
            mk("S", "B", "P", 0, 1, "CPD", {2.0}),
        };
        CHECK_THROWS_WITH_AS(mad_normalize(wells), doctest::Contains("S|B|P"), EvalError);
    }
    SUBCASE("per-plate independence and exact zero medians") {
        SplitRng rng(3);
        std::vector<WellEmbedding> wells;
        for (int p = 0; p < 2; ++p)
            for (int i = 0; i < 7; ++i) {
                std::vector<double> v = {rng.gaussian(), rng.gaussian(), rng.gaussian()};
                wells.push_back(mk("S", "B", "P" + std::to_string(p), 0, i,
                                   i < 3 ? "DMSO" : "CPD", std::move(v)));
            }
        mad_normalize(wells);
        for (int p = 0; p < 2; ++p) {
            for (size_t j = 0; j < 3; ++j) {
                std::vector<double> ctrl;
                for (const auto& w : wells)
                    if (w.plate_id == "P" + std::to_string(p) && w.is_control())
                        ctrl.push_back(w.vec[j]);
                std::sort(ctrl.begin(), ctrl.end());
                CHECK(ctrl[ctrl.size() / 2] == 0.0);  // odd count: exact middle
            }
        }
    }
}

TEST_CASE("spherizing") {
    SUBCASE("anisotropic controls whiten to identity covariance") {
        // sample covariance diag(4, 1): points (+-a, 0), (0, +-b), a^2 = 6, b^2 = 1.5
        const double a = std::sqrt(6.0), b = std::sqrt(1.5);
        std::vector<WellEmbedding> wells = {
            mk("S", "B", "P", 0, 0, "DMSO", {a, 0.0}),
            mk("S", "B", "P", 0, 1, "DMSO", {-a, 0.0}),
            mk("S", "B", "P", 0, 2, "DMSO", {0.0, b}),
            mk("S", "B", "P", 0, 3, "DMSO", {0.0, -b}),
            mk("S", "B", "P", 0, 4, "CPD", {1.0, 1.0}),
        };
        spherize(wells, 0.0);
        // transformed control covariance == I
        double cxx = 0, cyy = 0, cxy = 0;
        for (int i = 0; i < 4; ++i) {
            cxx += wells[i].vec[0] * wells[i].vec[0];
            cyy += wells[i].vec[1] * wells[i].vec[1];
            cxy += wells[i].vec[0] * wells[i].vec[1];
        }
        cxx /= 3.0;
        cyy /= 3.0;
        cxy /= 3.0;
        CHECK(cxx == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(cyy == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(std::abs(cxy) < 1e-8);
        // W = diag(1/2, 1): the treated well maps to (0.5, 1.0)
        CHECK(wells[4].vec[0] == doctest::Approx(0.5).epsilon(1e-8));
        CHECK(wells[4].vec[1] == doctest::Approx(1.0).epsilon(1e-8));
    }
    SUBCASE("already-white controls are (almost) untouched") {
        // zero-mean, exactly identity sample covariance
        const double a = std::sqrt(1.5);
        std::vector<WellEmbedding> wells = {
            mk("S", "B", "P", 0, 0, "DMSO", {a, 0.0}),
            mk("S", "B", "P", 0, 1, "DMSO", {-a, 0.0}),
            mk("S", "B", "P", 0, 2, "DMSO", {0.0, a}),
            mk("S", "B", "P", 0, 3, "DMSO", {0.0, -a}),
            mk("S", "B", "P", 0, 4, "CPD", {0.7, -0.2}),
        };
        spherize(wells, 0.0);
        CHECK(wells[4].vec[0] == doctest::Approx(0.7).epsilon(1e-8));
        CHECK(wells[4].vec[1] == doctest::Approx(-0.2).epsilon(1e-8));
    }
    SUBCASE("fewer controls than dimensions needs shrinkage") {
        SplitRng rng(9);
        std::vector<WellEmbedding> wells;
        for (int i = 0; i < 3; ++i) {  // 3 controls in 5 dims
            std::vector<double> v(5);
            for (auto& x : v) x = rng.gaussian();
            wells.push_back(mk("S", "B", "P", 0, i, "DMSO", std::move(v)));
        }
        std::vector<double> q(5);
        for (auto& x : q) x = rng.gaussian();
        wells.push_back(mk("S", "B", "P", 0, 9, "CPD", std::move(q)));

        auto rank_deficient = wells;
        CHECK_THROWS_WITH_AS(spherize(rank_deficient, 0.0),
                             doctest::Contains("not positive definite"), EvalError);

        spherize(wells, 0.1);
        for (const auto& w : wells)
            for (double v : w.vec) CHECK(std::isfinite(v));
        // with shrinkage s the whitened control covariance has eigenvalues
        // (1 - s*dbar/lambda'_i)/(1-s), so every diagonal entry <= 1/(1-s)
        double max_diag = 0.0;
        for (size_t j = 0; j < 5; ++j) {
            double c = 0.0;
            for (int i = 0; i < 3; ++i) c += wells[i].vec[j] * wells[i].vec[j];
            max_diag = std::max(max_diag, c / 2.0);
        }
        CHECK(max_diag <= 1.0 / 0.9 + 1e-9);
    }
}

TEST_CASE("1-NN retrieval") {
    SUBCASE("hand fixture, NSB") {
        const std::vector<WellEmbedding> retrieval = {
            mk("S0", "B1", "P", 0, 0, "a", {0.9, 0.1}),
            mk("S0", "B2", "P", 0, 0, "b", {0.0, 1.0}),
            mk("S0", "B0", "P", 0, 1, "a", {1.0, 0.0}),  // same batch as query: excluded
        };
        const std::vector<WellEmbedding> query = {mk("S0", "B0", "P", 0, 0, "a", {1.0, 0.0})};
        const auto rep = retrieve_1nn(query, retrieval, Constraint::nsb);
        REQUIRE(rep.per_query.size() == 1);
        CHECK(rep.per_query[0].matched_key == "S0|B1|P|0|0");
        CHECK(rep.per_query[0].correct);
        CHECK(rep.accuracy == 1.0);
        CHECK(rep.chance_level == doctest::Approx(0.5));  // labels {a, b}
    }
    SUBCASE("a query well present in retrieval never matches itself") {
        const std::vector<WellEmbedding> retrieval = {
            mk("S0", "B0", "P", 0, 0, "a", {1.0, 0.0}),
            mk("S0", "B0", "P", 0, 1, "b", {0.8, 0.2}),
        };
        const std::vector<WellEmbedding> query = {retrieval[0]};
        const auto rep = retrieve_1nn(query, retrieval, Constraint::none);
        CHECK(rep.per_query[0].matched_key == "S0|B0|P|0|1");
        CHECK(!rep.per_query[0].correct);
    }
    SUBCASE("NSS with no other source errors, naming the well") {
        const std::vector<WellEmbedding> retrieval = {
            mk("S0", "B1", "P", 0, 0, "a", {1.0, 0.0}),
        };
        const std::vector<WellEmbedding> query = {mk("S0", "B0", "P", 2, 3, "a", {1.0, 0.0})};
        CHECK_THROWS_WITH_AS(retrieve_1nn(query, retrieval, Constraint::nss),
                             doctest::Contains("S0|B0|P|2|3"), EvalError);
        // the same query is fine under NSB (different batch)
        CHECK(retrieve_1nn(query, retrieval, Constraint::nsb).accuracy == 1.0);
    }
    SUBCASE("exact ties resolve to the first candidate in key order") {
        const std::vector<WellEmbedding> retrieval = {
            mk("S1", "B0", "P", 5, 5, "x", {1.0, 0.0}),
            mk("S1", "B0", "P", 0, 0, "y", {2.0, 0.0}),  // same direction, same distance
        };
        const std::vector<WellEmbedding> query = {mk("S0", "B0", "P", 0, 0, "x", {3.0, 0.0})};
        const auto rep = retrieve_1nn(query, retrieval, Constraint::none);
        CHECK(rep.per_query[0].matched_key == "S1|B0|P|0|0");  // sorts before |5|5
    }
    SUBCASE("empty retrieval is rejected") {
        CHECK_THROWS_AS(retrieve_1nn({mk("S", "B", "P", 0, 0, "a", {1.0})}, {}, Constraint::none),
                        EvalError);
    }
}

namespace {

// independent exhaustive scan used to cross-check retrieve_1nn
std::string brute_force_match(const WellEmbedding& q, const std::vector<WellEmbedding>& retrieval,
                              Constraint c) {
    std::map<std::string, double> dist_by_key;
    for (const auto& cand : retrieval) {
        if (cand.key() == q.key()) continue;
        if (c == Constraint::nsb &&
            cand.source_id == q.source_id && cand.batch_id == q.batch_id)
            continue;
        if (c == Constraint::nss && cand.source_id == q.source_id) continue;
        double dq = 0, dc = 0, dot = 0;
        for (size_t j = 0; j < q.vec.size(); ++j) {
            dq += q.vec[j] * q.vec[j];
            dc += cand.vec[j] * cand.vec[j];
            dot += q.vec[j] * cand.vec[j];
        }
        dist_by_key[cand.key()] = 1.0 - dot / (std::sqrt(dq) * std::sqrt(dc));
    }
    std::string best;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& [key, d] : dist_by_key)  // map iterates in key order
        if (d < best_d) {
            best_d = d;
            best = key;
        }
    return best;
}

std::vector<WellEmbedding> random_wells(SplitRng& rng, size_t n, size_t d) {
    std::vector<WellEmbedding> out;
    const std::vector<std::string> perts = {"DMSO", "c1", "c2", "c3", "c4"};
    for (size_t i = 0; i < n; ++i) {
        std::vector<double> v(d);
        for (auto& x : v) x = rng.gaussian();
        out.push_back(mk("S" + std::to_string(rng.below(3)), "B" + std::to_string(rng.below(2)),
                         "P" + std::to_string(rng.below(2)), static_cast<int>(i / 24),
                         static_cast<int>(i % 24), perts[rng.below(perts.size())], std::move(v)));
    }
    return out;
}

}  // namespace

TEST_CASE("retrieval agrees with an independent exhaustive scan") {
    SplitRng root(42);
    int checked = 0;
    for (int inst = 0; inst < 30; ++inst) {
        auto rng = root.split(inst);
        const size_t d = 2 + rng.below(7);
        auto retrieval = random_wells(rng, 20 + rng.below(30), d);
        auto queries = random_wells(rng, 8, d);
        for (Constraint c : {Constraint::none, Constraint::nsb, Constraint::nss}) {
            // keep only queries with at least one eligible candidate
            std::vector<WellEmbedding> solvable;
            for (const auto& q : queries)
                if (!brute_force_match(q, retrieval, c).empty()) solvable.push_back(q);
            if (solvable.empty()) continue;
            const auto rep = retrieve_1nn(solvable, retrieval, c);
            REQUIRE(rep.per_query.size() == solvable.size());
            for (size_t i = 0; i < solvable.size(); ++i) {
                CHECK(rep.per_query[i].matched_key ==
                      brute_force_match(solvable[i], retrieval, c));
                ++checked;
            }
        }
    }
    CHECK(checked > 300);
}

TEST_CASE("relaxing the constraint never shrinks a query's candidate set") {
    SplitRng rng(55);
    const auto retrieval = random_wells(rng, 40, 4);
    const auto queries = random_wells(rng, 10, 4);
    for (const auto& q : queries) {
        auto count = [&](Constraint c) {
            size_t n = 0;
            for (const auto& cand : retrieval) {
                if (cand.key() == q.key()) continue;
                if (c == Constraint::nsb && cand.batch_key() == q.batch_key()) continue;
                if (c == Constraint::nss && cand.source_id == q.source_id) continue;
                ++n;
            }
            return n;
        };
        CHECK(count(Constraint::nss) <= count(Constraint::nsb));
        CHECK(count(Constraint::nsb) <= count(Constraint::none));
    }
}

TEST_CASE("retrieval report serializes to JSON") {
    const std::vector<WellEmbedding> retrieval = {
        mk("S0", "B1", "P", 0, 0, "a", {1.0, 0.0}),
        mk("S1", "B0", "P", 0, 0, "b", {0.0, 1.0}),
    };
    const std::vector<WellEmbedding> query = {mk("S0", "B0", "P", 0, 0, "a", {1.0, 0.1})};
    const auto rep = retrieve_1nn(query, retrieval, Constraint::nsb);
    const std::string json = report_to_json(rep);
    CHECK(json.find("\"constraint\": \"NSB\"") != std::string::npos);
    CHECK(json.find("\"n_queries\": 1") != std::string::npos);
    CHECK(json.find("\"accuracy\": 1") != std::string::npos);
    CHECK(json.find("S0|B0|P|0|0") != std::string::npos);
    CHECK(json.find("\"correct\": true") != std::string::npos);
}

TEST_CASE("constraint names round trip") {
    for (Constraint c : {Constraint::none, Constraint::nsb, Constraint::nss})
        CHECK(constraint_from_string(constraint_to_string(c)) == c);
    CHECK_THROWS_AS(constraint_from_string("nearest"), micon::ConfigError);
}

// ---- statistics ----

TEST_CASE("t-test and ANOVA match the committed oracle fixture") {
    std::ifstream in(std::string(TEST_DATA_DIR) + "/stats_fixture.tsv");
    REQUIRE(in.good());
    std::string line;
    int n_ttest = 0, n_anova = 0, n_tsf = 0, n_fsf = 0;
    auto parse_csv = [](const std::string& s) {
        std::vector<double> out;
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
        return out;
    };
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string kind;
        std::getline(ss, kind, '\t');
        std::vector<std::string> f;
        std::string tok;
        while (std::getline(ss, tok, '\t')) f.push_back(tok);
        if (kind == "ttest") {
            const auto a = parse_csv(f[2]), b = parse_csv(f[3]);
            REQUIRE(a.size() == std::stoul(f[0]));
            REQUIRE(b.size() == std::stoul(f[1]));
            const auto [t, p] = t_test_one_tailed(a, b);
            CHECK(t == doctest::Approx(std::stod(f[4])).epsilon(1e-6));
            CHECK(p == doctest::Approx(std::stod(f[5])).epsilon(1e-6));
            ++n_ttest;
        } else if (kind == "anova") {
            const size_t n = std::stoul(f[0]), k = std::stoul(f[1]);
            const auto flat = parse_csv(f[2]);
            REQUIRE(flat.size() == n * k);
            Matrix table(n, k);
            table.data = flat;
            const auto [F, p] = rm_anova(table);
            CHECK(F == doctest::Approx(std::stod(f[3])).epsilon(1e-6));
            CHECK(p == doctest::Approx(std::stod(f[4])).epsilon(1e-6));
            ++n_anova;
        } else if (kind == "tsf") {
            CHECK(student_t_sf(std::stod(f[0]), std::stod(f[1])) ==
                  doctest::Approx(std::stod(f[2])).epsilon(1e-9));
            ++n_tsf;
        } else if (kind == "fsf") {
            CHECK(f_sf(std::stod(f[0]), std::stod(f[1]), std::stod(f[2])) ==
                  doctest::Approx(std::stod(f[3])).epsilon(1e-9));
            ++n_fsf;
        }
    }
    CHECK(n_ttest >= 9);
    CHECK(n_anova >= 4);
    CHECK(n_tsf >= 6);
    CHECK(n_fsf >= 4);
}

TEST_CASE("t-test hand case and conventions") {
    const auto [t, p] = t_test_one_tailed({2, 3, 4}, {0, 1, 2});
    CHECK(t == doctest::Approx(2.449489742783178).epsilon(1e-12));
    CHECK(p == doctest::Approx(0.0352419984551).epsilon(1e-9));

    // identical samples: t = 0, p = 0.5
    const auto [t0, p0] = t_test_one_tailed({1, 1, 1}, {1, 1, 1});
    CHECK(t0 == 0.0);
    CHECK(p0 == 0.5);

    // swapping the groups flips t and maps p -> 1 - p
    const auto [ts, ps] = t_test_one_tailed({0, 1, 2}, {2, 3, 4});
    CHECK(ts == doctest::Approx(-t).epsilon(1e-12));
    CHECK(ps == doctest::Approx(1.0 - p).epsilon(1e-12));

    // zero variance, distinct means
    const auto [ti, pi] = t_test_one_tailed({2, 2}, {1, 1});
    CHECK(std::isinf(ti));
    CHECK(pi == 0.0);

    CHECK_THROWS_AS(t_test_one_tailed({1.0}, {1, 2}), EvalError);
}

TEST_CASE("repeated-measures ANOVA conventions") {
    Matrix equal(3, 2);
    for (auto& v : equal.data) v = 7.0;
    const auto [f0, p0] = rm_anova(equal);
    CHECK(f0 == 0.0);
    CHECK(p0 == 1.0);

    // perfectly additive: condition effect +1, zero error SS
    Matrix additive(3, 2);
    additive(0, 0) = 1;
    additive(0, 1) = 2;
    additive(1, 0) = 2;
    additive(1, 1) = 3;
    additive(2, 0) = 3;
    additive(2, 1) = 4;
    const auto [f1, p1] = rm_anova(additive);
    CHECK(std::isinf(f1));
    CHECK(p1 == 0.0);

    Matrix incomplete(2, 2);
    incomplete(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(rm_anova(incomplete), EvalError);
    CHECK_THROWS_AS(rm_anova(Matrix(1, 3)), EvalError);
}

TEST_CASE("tail probability basics") {
    CHECK(student_t_sf(0.0, 5.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(student_t_sf(100.0, 5.0) < 1e-8);
    CHECK(student_t_sf(-100.0, 5.0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(f_sf(0.0, 2, 5) == 1.0);
    // paper-style spot value: F(1, 3) with F = 9.249 has p slightly above 0.05
    const double p = f_sf(9.249, 1.0, 3.0);
    CHECK(p > 0.05);
    CHECK(p < 0.06);
    CHECK(reg_inc_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(reg_inc_beta(2.0, 3.0, 1.0) == 1.0);
    // symmetry: I_x(a,b) + I_{1-x}(b,a) = 1
    CHECK(reg_inc_beta(2.5, 1.5, 0.3) + reg_inc_beta(1.5, 2.5, 0.7) ==
          doctest::Approx(1.0).epsilon(1e-12));
}
