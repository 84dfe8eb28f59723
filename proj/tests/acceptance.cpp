// Acceptance gate: ten checks, one printed verdict line each, exit 0 only if
// every one passes. Tolerances are pinned next to each check.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "prft/episodes.hpp"
#include "prft/paradigms.hpp"
#include "prft/report.hpp"
#include "prft/rft_loss.hpp"
#include "prft/shapes.hpp"
#include "prft/sweep.hpp"

using namespace prft;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void verdict(int id, const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << id << "  " << name;
    if (!detail.empty()) std::cout << "  [" << detail << "]";
    std::cout << "\n" << std::flush;
    if (!ok) ++g_failures;
}

double now_s() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

std::string fmt(double v) { return format_double(v); }

// --- 1: finite-difference gradient oracle ------------------------------------

// Central differences are only trustworthy away from relu boundaries and
// max-pool ties; a perturbation of 1e-5 must not flip any branch.
bool kink_free(const EncoderParams& p, const PointCloud& pc, double margin) {
    const std::size_t n = pc.size();
    const std::size_t h1 = p.body.h1();
    const std::size_t h2 = p.body.h2();
    std::vector<double> a1(n * h1), a2(n * h2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < h1; ++j) {
            double z = p.body.b1.data[j];
            for (std::size_t d = 0; d < 3; ++d) {
                z += pc.xyz[3 * i + d] * p.body.w1.data[d * h1 + j];
            }
            if (std::abs(z) < margin) return false;
            a1[i * h1 + j] = z > 0.0 ? z : 0.0;
        }
        for (std::size_t j = 0; j < h2; ++j) {
            double z = p.body.b2.data[j];
            for (std::size_t k = 0; k < h1; ++k) {
                z += a1[i * h1 + k] * p.body.w2.data[k * h2 + j];
            }
            if (std::abs(z) < margin) return false;
            a2[i * h2 + j] = z > 0.0 ? z : 0.0;
        }
    }
    if (n > 1) {
        for (std::size_t j = 0; j < h2; ++j) {
            double top1 = -1e300, top2 = -1e300;
            for (std::size_t i = 0; i < n; ++i) {
                const double v = a2[i * h2 + j];
                if (v > top1) {
                    top2 = top1;
                    top1 = v;
                } else if (v > top2) {
                    top2 = v;
                }
            }
            if (top1 - top2 < margin) return false;
        }
    }
    return true;
}

void criterion_gradient_oracle() {
    const double t0 = now_s();
    const double step = 1e-5, rel_tol = 1e-4, abs_tol = 1e-8;
    double worst = 0.0;
    bool ok = true;
    std::string why;

    Rng rng(401);
    for (int trial = 0; trial < 20 && ok; ++trial) {
        std::size_t h1 = 0, h2 = 0, c = 0, n = 0;
        EncoderParams p;
        PointCloud pc;
        bool found = false;
        for (int attempt = 0; attempt < 200 && !found; ++attempt) {
            h1 = 3 + rng.uniform_int(3);
            h2 = 3 + rng.uniform_int(3);
            c = 2 + rng.uniform_int(3);
            n = 5 + rng.uniform_int(5);
            p = init_params(rng.uniform_int(1u << 30), h1, h2, c);
            pc.xyz.resize(3 * n);
            for (auto& v : pc.xyz) v = rng.normal() * 0.5;
            found = kink_free(p, pc, 1e-3);
        }
        if (!found) {
            ok = false;
            why = "no kink-free instance found for trial " + std::to_string(trial);
            break;
        }
        const int label = static_cast<int>(rng.uniform_int(c));

        std::vector<Tensor> leaves = {p.body.w1, p.body.b1, p.body.w2,
                                      p.body.b2, p.head_w, p.head_b};
        auto as_params = [](const std::vector<Var>& vs) {
            return ParamVars{vs[0], vs[1], vs[2], vs[3], vs[4], vs[5]};
        };

        auto sft = prft_test::gradcheck(
            leaves,
            [&](Tape& tape, const std::vector<Var>& vs) {
                return sft_loss(tape, classify(tape, as_params(vs), pc), label);
            },
            step, rel_tol, abs_tol);
        worst = std::max(worst, sft.max_err);
        if (!sft.ok) {
            ok = false;
            why = "sft trial " + std::to_string(trial) + ": " + sft.detail;
            break;
        }

        // surrogate loss: detached snapshot probabilities and advantages are
        // plain data, the gradient flows through the live softmax
        const std::vector<double> old_probs = classify_probs(p, pc);
        const AdvantageVector adv = standardize(combined_reward(label, old_probs, 1.0, 2.0));
        auto rft = prft_test::gradcheck(
            leaves,
            [&](Tape& tape, const std::vector<Var>& vs) {
                LossInputs in;
                in.new_probs = softmax(tape, classify(tape, as_params(vs), pc));
                in.old_probs = old_probs;
                in.advantages = adv;
                in.epsilon_clip = 0.2;
                return pointrft_loss(tape, in);
            },
            step, rel_tol, abs_tol);
        worst = std::max(worst, rft.max_err);
        if (!rft.ok) {
            ok = false;
            why = "surrogate trial " + std::to_string(trial) + ": " + rft.detail;
        }
    }

    const double elapsed = now_s() - t0;
    if (ok && elapsed >= 30.0) {
        ok = false;
        why = "too slow";
    }
    verdict(1, "gradients match central differences (20 encoders, step 1e-5, rel 1e-4)",
            ok,
            ok ? "max combined err " + fmt(worst) + ", " + fmt(elapsed) + "s" : why);
}

// --- 2: hand-worked oracles ---------------------------------------------------

void criterion_hand_worked() {
    // two classes, true class first, snapshot [0.6, 0.4], live [0.9, 0.1],
    // weights a=1 b=2, clip 0.2: surrogate terms min(1.5, 1.2)*1 = 1.2 and
    // min(-0.25, -0.8) = -0.8, mean 0.2, loss -0.2
    Tape tape;
    Tensor live;
    live.shape = {2};
    live.data = {0.9, 0.1};
    LossInputs in;
    in.new_probs = tape.leaf(live);
    in.old_probs = {0.6, 0.4};
    in.advantages = standardize(combined_reward(0, in.old_probs, 1.0, 2.0));
    in.epsilon_clip = 0.2;
    const double loss = tape.value(pointrft_loss(tape, in))[0];
    const double tol_loss = 1e-12;
    const bool loss_ok = std::abs(loss - (-0.2)) < tol_loss;

    // three classes, snapshot [0.7, 0.2, 0.1]: combined rewards
    // [1.6, -0.4, -0.2] standardize to about [1.4084, -0.8154, -0.5930]
    const std::vector<double> snapshot3 = {0.7, 0.2, 0.1};
    const AdvantageVector adv = standardize(combined_reward(0, snapshot3, 1.0, 2.0));
    const double tol_adv = 1e-3;
    const std::vector<double> want = {1.4084, -0.8154, -0.5930};
    bool adv_ok = !adv.degenerate;
    double adv_err = 0.0;
    for (std::size_t i = 0; i < want.size(); ++i) {
        adv_err = std::max(adv_err, std::abs(adv.values[i] - want[i]));
    }
    adv_ok = adv_ok && adv_err < tol_adv;

    verdict(2, "hand-worked oracles: clipped loss -0.2 (1e-12), 3-class advantages (1e-3)",
            loss_ok && adv_ok,
            "loss err " + fmt(std::abs(loss + 0.2)) + ", advantage err " + fmt(adv_err));
}

// --- 3: zero loss, live gradient at the snapshot ------------------------------

void criterion_zero_at_snapshot() {
    Rng rng(977);
    double worst_loss = 0.0;
    double min_grad_norm = 1e300;
    bool ok = true;
    const double tol = 1e-12;

    for (int trial = 0; trial < 100 && ok; ++trial) {
        const std::size_t h1 = 3 + rng.uniform_int(4);
        const std::size_t h2 = 3 + rng.uniform_int(4);
        const std::size_t c = 2 + rng.uniform_int(5);
        const std::size_t n = 4 + rng.uniform_int(8);
        EncoderParams p = init_params(rng.uniform_int(1u << 30), h1, h2, c);
        PointCloud pc;
        pc.xyz.resize(3 * n);
        for (auto& v : pc.xyz) v = rng.normal();
        const int label = static_cast<int>(rng.uniform_int(c));

        // the live policy IS the snapshot
        const std::vector<double> old_probs = classify_probs(p, pc);
        const AdvantageVector adv = standardize(combined_reward(label, old_probs, 1.0, 2.0));
        if (adv.degenerate) continue;

        Tape tape;
        ParamVars vars = record_params(tape, p);
        LossInputs in;
        in.new_probs = softmax(tape, classify(tape, vars, pc));
        in.old_probs = old_probs;
        in.advantages = adv;
        in.epsilon_clip = 0.2;
        Var loss = pointrft_loss(tape, in);
        worst_loss = std::max(worst_loss, std::abs(tape.value(loss)[0]));
        if (worst_loss >= tol) {
            ok = false;
            break;
        }
        p.zero_grad();
        tape.backward(loss);
        double norm2 = 0.0;
        for (const Tensor* t : p.all()) {
            for (double g : t->grad) norm2 += g * g;
        }
        min_grad_norm = std::min(min_grad_norm, std::sqrt(norm2));
        if (min_grad_norm <= 0.0) ok = false;
    }

    verdict(3, "loss is 0 at the snapshot (100 cases, 1e-12) with nonzero gradient", ok,
            "max |loss| " + fmt(worst_loss) + ", min grad norm " + fmt(min_grad_norm));
}

// --- 4: reward and advantage invariants ---------------------------------------

void criterion_reward_invariants() {
    bool ok = true;
    std::string why;
    double worst_mean = 0.0, worst_std = 0.0, worst_affine = 0.0;

    for (int c = 2; c <= 64 && ok; ++c) {
        for (int k = 0; k < c; ++k) {
            const auto r = accuracy_reward(k, c);
            double mean = 0.0;
            for (double v : r) mean += v;
            mean /= c;
            if (mean != 1.0) { // exact by construction: c/c
                ok = false;
                why = "accuracy reward mean " + fmt(mean) + " at k=" + std::to_string(k) +
                      " c=" + std::to_string(c);
            }
        }
    }

    Rng rng(515);
    for (int trial = 0; trial < 200 && ok; ++trial) {
        const int c = 2 + static_cast<int>(rng.uniform_int(63));
        std::vector<double> rewards(static_cast<std::size_t>(c));
        for (auto& v : rewards) v = rng.normal() * 3.0;
        const AdvantageVector adv = standardize(rewards);
        if (adv.degenerate) continue;
        double mean = 0.0;
        for (double v : adv.values) mean += v;
        mean /= c;
        double var = 0.0;
        for (double v : adv.values) var += (v - mean) * (v - mean);
        const double sd = std::sqrt(var / c);
        worst_mean = std::max(worst_mean, std::abs(mean));
        worst_std = std::max(worst_std, std::abs(sd - 1.0));
        if (std::abs(mean) >= 1e-12 || std::abs(sd - 1.0) >= 1e-9) {
            ok = false;
            why = "standardize moments off at trial " + std::to_string(trial);
        }

        // positive-affine invariance
        const double alpha = 0.1 + 9.9 * rng.uniform01();
        const double beta = rng.normal() * 5.0;
        std::vector<double> shifted(rewards.size());
        for (std::size_t i = 0; i < rewards.size(); ++i) shifted[i] = alpha * rewards[i] + beta;
        const AdvantageVector adv2 = standardize(shifted);
        for (std::size_t i = 0; i < rewards.size(); ++i) {
            worst_affine = std::max(worst_affine, std::abs(adv2.values[i] - adv.values[i]));
        }
        if (worst_affine >= 1e-9) {
            ok = false;
            why = "affine invariance violated at trial " + std::to_string(trial);
        }
    }

    verdict(4, "reward mean exactly 1 (c in [2,64]); advantages zero-mean unit-std, affine-invariant",
            ok,
            ok ? "|mean| max " + fmt(worst_mean) + ", |std-1| max " + fmt(worst_std) +
                     ", affine max " + fmt(worst_affine)
               : why);
}

// --- 5: reductions -------------------------------------------------------------

void criterion_reductions() {
    bool ok = true;
    std::string why;

    // accuracy-only advantages carry the (+ true, - rest) sign pattern
    Rng rng(31337);
    for (int trial = 0; trial < 200 && ok; ++trial) {
        const int c = 2 + static_cast<int>(rng.uniform_int(15));
        const int k = static_cast<int>(rng.uniform_int(c));
        std::vector<double> probs(static_cast<std::size_t>(c));
        double s = 0.0;
        for (auto& p : probs) {
            p = rng.uniform01() + 1e-3;
            s += p;
        }
        for (auto& p : probs) p /= s;
        const AdvantageVector adv = standardize(combined_reward(k, probs, 1.0, 0.0));
        for (int i = 0; i < c; ++i) {
            const bool want_pos = i == k;
            if (want_pos != (adv.values[static_cast<std::size_t>(i)] > 0.0)) {
                ok = false;
                why = "sign pattern broken at trial " + std::to_string(trial);
            }
        }
    }

    // hybrid with the second stage disabled collapses onto supervised-only
    if (ok) {
        Dataset ds = generate_dataset(default_specs(4, "clean"), 8, 24, 7001);
        PretrainConfig pcfg;
        pcfg.epochs = 4;
        pcfg.lr = 5e-3;
        pcfg.h1 = 8;
        pcfg.h2 = 12;
        pcfg.batch_size = 8;
        pcfg.seed = 3;
        Checkpoint ckpt = pretrain(view_of(ds), pcfg);
        Rng erng(5);
        Episode ep = sample_episode(ds, 3, 2, 1, erng);
        std::vector<PointCloud> support;
        for (const auto& pc : ep.support) {
            PointCloud n = normalize_cloud(pc);
            n.label = pc.label;
            support.push_back(std::move(n));
        }
        ParadigmConfig cfg;
        cfg.sft_epochs = 3;
        cfg.rft_epochs = 0;
        cfg.batch_size = 4;
        cfg.seed = 11;
        cfg.kind = ParadigmKind::PreSR;
        EncoderParams hybrid = apply_paradigm(ckpt, support, cfg);
        cfg.kind = ParadigmKind::PreS;
        EncoderParams plain = apply_paradigm(ckpt, support, cfg);
        if (hybrid.body.w1.data != plain.body.w1.data ||
            hybrid.body.b1.data != plain.body.b1.data ||
            hybrid.body.w2.data != plain.body.w2.data ||
            hybrid.body.b2.data != plain.body.b2.data ||
            hybrid.head_w.data != plain.head_w.data ||
            hybrid.head_b.data != plain.head_b.data) {
            ok = false;
            why = "hybrid(second stage 0) differs from supervised-only";
        }
    }

    // with every ratio strictly inside the trust band the clipped objective
    // is bit-for-bit the plain ratio objective
    if (ok) {
        Rng crng(2718);
        for (int trial = 0; trial < 100 && ok; ++trial) {
            const int c = 2 + static_cast<int>(crng.uniform_int(6));
            std::vector<double> old_probs(static_cast<std::size_t>(c));
            double s = 0.0;
            for (auto& p : old_probs) {
                p = crng.uniform01() + 0.05;
                s += p;
            }
            for (auto& p : old_probs) p /= s;
            std::vector<double> live(old_probs);
            double s2 = 0.0;
            for (auto& p : live) {
                p *= 1.0 + 0.05 * (crng.uniform01() - 0.5);
                s2 += p;
            }
            for (auto& p : live) p /= s2;
            bool inside = true;
            for (int i = 0; i < c; ++i) {
                const double ratio = live[static_cast<std::size_t>(i)] /
                                     old_probs[static_cast<std::size_t>(i)];
                if (ratio <= 0.81 || ratio >= 1.19) inside = false;
            }
            if (!inside) continue;

            const int k = static_cast<int>(crng.uniform_int(c));
            const AdvantageVector adv = standardize(combined_reward(k, old_probs, 1.0, 2.0));

            Tensor t1;
            t1.shape = {static_cast<std::size_t>(c)};
            t1.data = live;
            Tape tape;
            LossInputs in;
            in.new_probs = tape.leaf(t1);
            in.old_probs = old_probs;
            in.advantages = adv;
            in.epsilon_clip = 0.2;
            const double clipped = tape.value(pointrft_loss(tape, in))[0];

            // plain surrogate on a second tape: -mean(ratio * A)
            Tensor t2 = t1;
            Tape tape2;
            Var live_v = tape2.leaf(t2);
            Tensor old_t;
            old_t.shape = t2.shape;
            old_t.data = old_probs;
            Var ratio = div(tape2, live_v, tape2.constant(old_t));
            Tensor adv_t;
            adv_t.shape = t2.shape;
            adv_t.data = adv.values;
            const double plain =
                tape2.value(neg(tape2, mean(tape2, mul(tape2, ratio, tape2.constant(adv_t)))))[0];
            if (clipped != plain) {
                ok = false;
                why = "inactive clip changed the value at trial " + std::to_string(trial);
            }
        }
    }

    verdict(5, "reductions: accuracy-only sign pattern, hybrid collapse bitwise, inactive clip exact",
            ok, why);
}

// --- 6: permutation invariance -------------------------------------------------

void criterion_permutation_invariance() {
    Rng rng(606);
    EncoderParams p = init_params(42, 16, 24, 5);
    PointCloud pc;
    pc.xyz.resize(3 * 48);
    for (auto& v : pc.xyz) v = rng.normal();
    const std::vector<double> base = classify_logits(p, pc);

    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::size_t> perm(48);
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        rng.shuffle(perm);
        PointCloud shuffled;
        shuffled.xyz.resize(pc.xyz.size());
        for (std::size_t i = 0; i < perm.size(); ++i) {
            for (int d = 0; d < 3; ++d) {
                shuffled.xyz[3 * i + static_cast<std::size_t>(d)] =
                    pc.xyz[3 * perm[i] + static_cast<std::size_t>(d)];
            }
        }
        const std::vector<double> got = classify_logits(p, shuffled);
        for (std::size_t i = 0; i < got.size(); ++i) {
            worst = std::max(worst, std::abs(got[i] - base[i]));
        }
    }
    const double tol = 1e-9;
    verdict(6, "logits invariant under 50 point permutations (1e-9)", worst <= tol,
            "max deviation " + fmt(worst));
}

// --- 7: desk-scale paradigm experiment -----------------------------------------

void criterion_experiment() {
    const double t0 = now_s();

    // 12-class corrupted benchmark, 7 base / 5 new, 64-point clouds
    const Dataset ds = generate_dataset(default_specs(12, "corrupted"), 40, 64, 2026,
                                        "corrupted");
    const std::uint64_t seeds[] = {1, 2, 3};
    const std::size_t shots[] = {1, 5};
    const ParadigmKind kinds[] = {ParadigmKind::PreS, ParadigmKind::PreR,
                                  ParadigmKind::PreSR};

    // per (kind, shot): per-seed episode-mean accuracies
    std::vector<double> acc[3][2];
    bool ok = true;
    std::string why;
    double control_gap = 0.0;
    bool det_ok = true;

    for (std::uint64_t seed : seeds) {
        auto [base_ids, new_ids] = base_new_split(ds, 7, seed);
        const Dataset base_ds = subset_by_classes(ds, base_ids);
        const Dataset new_ds = subset_by_classes(ds, new_ids);

        PretrainConfig pcfg;
        pcfg.epochs = 40;
        pcfg.lr = 5e-3;
        pcfg.batch_size = 32;
        pcfg.h1 = 32;
        pcfg.h2 = 64;
        pcfg.holdout_fraction = 0.2;
        pcfg.seed = seed;
        const Checkpoint ckpt = pretrain(view_of(base_ds), pcfg);

        for (std::size_t si = 0; si < 2; ++si) {
            for (std::size_t ki = 0; ki < 3; ++ki) {
                ParadigmConfig cfg;
                cfg.kind = kinds[ki];
                cfg.sft_epochs = 20;
                cfg.rft_epochs = 20;
                cfg.lr = 5e-3;
                cfg.batch_size = 16;
                cfg.seed = seed;

                EvalConfig ev;
                ev.n_way = 5;
                ev.m_shot = shots[si];
                ev.q_size = 10;
                ev.n_episodes = 100;
                ev.seed = seed;

                const FewShotResult r = meta_evaluate(ckpt, new_ds, ev, cfg);
                acc[ki][si].push_back(r.mean_accuracy);

                // rerun one cell per seed: per-seed determinism is a hard outcome
                if (ki == 0 && si == 0) {
                    const FewShotResult r2 = meta_evaluate(ckpt, new_ds, ev, cfg);
                    if (r2.accuracies != r.accuracies) det_ok = false;
                }
            }
        }

        // untrained control once, on the first seed: chance is 1/5
        if (seed == seeds[0]) {
            ParadigmConfig cfg;
            cfg.kind = ParadigmKind::PreSR;
            cfg.sft_epochs = 0;
            cfg.rft_epochs = 0;
            cfg.seed = seed;
            EvalConfig ev;
            ev.n_way = 5;
            ev.m_shot = 1;
            ev.q_size = 10;
            ev.n_episodes = 200;
            ev.seed = seed + 1000;
            const FewShotResult control = meta_evaluate(ckpt, new_ds, ev, cfg);
            control_gap = std::abs(control.mean_accuracy - 0.2);
            if (control_gap >= 0.04) {
                ok = false;
                why = "untrained control " + fmt(control.mean_accuracy) + " not near 0.2";
            }
        }
    }
    if (!det_ok) {
        ok = false;
        why = "per-seed rerun differs";
    }

    auto mean3 = [](const std::vector<double>& v) {
        return (v[0] + v[1] + v[2]) / 3.0;
    };
    auto std3 = [&](const std::vector<double>& v) {
        const double m = mean3(v);
        return std::sqrt(((v[0] - m) * (v[0] - m) + (v[1] - m) * (v[1] - m) +
                          (v[2] - m) * (v[2] - m)) /
                         3.0);
    };

    // directional outcome: the hybrid should not trail supervised-only by
    // more than one pooled std of the 3-seed means, in either setting
    std::string summary;
    for (std::size_t si = 0; si < 2 && ok; ++si) {
        const double m_s = mean3(acc[0][si]);
        const double m_sr = mean3(acc[2][si]);
        const double pooled =
            std::sqrt((std3(acc[0][si]) * std3(acc[0][si]) +
                       std3(acc[2][si]) * std3(acc[2][si])) /
                      2.0);
        if (!summary.empty()) summary += "; ";
        summary += std::to_string(shots[si]) + "-shot S " + fmt(m_s) + " R " +
                   fmt(mean3(acc[1][si])) + " SR " + fmt(m_sr);
        if (m_sr < m_s - pooled) {
            ok = false;
            why = std::to_string(shots[si]) + "-shot regression: hybrid " + fmt(m_sr) +
                  " vs supervised " + fmt(m_s) + " (pooled std " + fmt(pooled) + ")";
        }
    }

    const double elapsed = now_s() - t0;
    if (ok && elapsed >= 600.0) {
        ok = false;
        why = "over the 10-minute budget: " + fmt(elapsed) + "s";
    }
    verdict(7, "12-class experiment: deterministic, control at chance, hybrid >= supervised",
            ok,
            ok ? summary + "; control gap " + fmt(control_gap) + "; " + fmt(elapsed) + "s"
               : why);
}

// --- 8: ablation harness --------------------------------------------------------

void criterion_ablation() {
    bool ok = true;
    std::string why;

    Dataset ds = generate_dataset(default_specs(7, "clean"), 10, 32, 4400);
    PretrainConfig pcfg;
    pcfg.epochs = 10;
    pcfg.lr = 5e-3;
    pcfg.h1 = 12;
    pcfg.h2 = 16;
    pcfg.batch_size = 8;
    pcfg.seed = 8;
    Checkpoint ckpt = pretrain(view_of(ds), pcfg);

    ParadigmConfig base;
    base.kind = ParadigmKind::PreR;
    base.rft_epochs = 4;
    base.lr = 5e-3;
    base.batch_size = 8;
    base.seed = 17;

    EvalConfig ev;
    ev.n_way = 5;
    ev.m_shot = 2;
    ev.q_size = 4;
    ev.n_episodes = 6;
    ev.seed = 29;

    const auto grid = default_ablation_grid(); // b = 0, 1, 2 at clip 0.2
    std::vector<SweepRow> rows;
    try {
        rows = ablation_sweep(ckpt, ds, base, ev, grid);
    } catch (const std::exception& e) {
        ok = false;
        why = std::string("sweep failed: ") + e.what();
    }
    if (ok && rows.size() != 3) {
        ok = false;
        why = "expected 3 cells, got " + std::to_string(rows.size());
    }
    if (ok) {
        // paired: every cell saw the same episode seed stream
        for (const auto& r : rows) {
            if (r.seed != ev.seed || r.result.episodes != 6) {
                ok = false;
                why = "cells not paired on the episode seed";
            }
        }
    }

    if (ok) {
        // accuracy-only vs dispersion-heavy must land on different parameters
        Rng erng(92);
        Episode ep = sample_episode(ds, 5, 2, 1, erng);
        std::vector<PointCloud> support;
        for (const auto& pc : ep.support) {
            PointCloud n = normalize_cloud(pc);
            n.label = pc.label;
            support.push_back(std::move(n));
        }
        ParadigmConfig c0 = base;
        c0.a = 1.0;
        c0.b = 0.0;
        ParadigmConfig c2 = base;
        c2.a = 1.0;
        c2.b = 2.0;
        EncoderParams p0 = apply_paradigm(ckpt, support, c0);
        EncoderParams p2 = apply_paradigm(ckpt, support, c2);
        if (p0.head_w.data == p2.head_w.data && p0.body.w1.data == p2.body.w1.data) {
            ok = false;
            why = "b=0 and b=2 produced identical parameters";
        }
    }

    verdict(8, "ablation sweep (b=0/1/2, paired episodes) completes; b=0 vs b=2 parameters differ",
            ok, why);
}

// --- 9: determinism and I/O -----------------------------------------------------

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(PRFT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void criterion_determinism_io() {
    bool ok = true;
    std::string why;

    // library round-trips, bitwise
    {
        Dataset ds = generate_dataset(default_specs(5, "corrupted"), 6, 20, 31415,
                                      "corrupted");
        fs::create_directories("acc_work");
        save_dataset(ds, "acc_work/rt.prftpc");
        Dataset back = load_dataset("acc_work/rt.prftpc");
        if (back.clouds.size() != ds.clouds.size() || back.class_names != ds.class_names) {
            ok = false;
            why = "dataset round-trip changed the structure";
        }
        for (std::size_t i = 0; ok && i < ds.clouds.size(); ++i) {
            if (back.clouds[i].xyz != ds.clouds[i].xyz ||
                back.clouds[i].label != ds.clouds[i].label) {
                ok = false;
                why = "dataset round-trip changed cloud " + std::to_string(i);
            }
        }

        if (ok) {
            Checkpoint ckpt;
            ckpt.body = init_body(777, 8, 12);
            ckpt.manifest = {{"note", "round-trip probe"}};
            save_checkpoint(ckpt, "acc_work/rt.prftckpt");
            Checkpoint cback = load_checkpoint("acc_work/rt.prftckpt");
            if (cback.body.w1.data != ckpt.body.w1.data ||
                cback.body.b1.data != ckpt.body.b1.data ||
                cback.body.w2.data != ckpt.body.w2.data ||
                cback.body.b2.data != ckpt.body.b2.data) {
                ok = false;
                why = "checkpoint round-trip changed tensors";
            }
        }
    }

    // one CLI pipeline run twice writes identical bytes
    if (ok) {
        const std::string d = "acc_work/cli.prftpc";
        const std::string m = "acc_work/cli.prftckpt";
        if (run_cli("gen-data --classes 6 --per-class 10 --points 32 --seed 3 --out " + d) != 0 ||
            run_cli("pretrain --data " + d + " --out " + m +
                    " --epochs 6 --lr 5e-3 --batch 8 --h1 8 --h2 12 --base-classes 4 --seed 3") != 0) {
            ok = false;
            why = "CLI fixture commands failed";
        }
        const std::string few = "fewshot --ckpt " + m + " --data " + d +
                                " --n-way 2 --m-shot 2 --q-size 4 --episodes 4 "
                                "--sft-epochs 2 --rft-epochs 2 --batch 4 --seed 9 "
                                "--parallel 1 --out-csv acc_work/r.csv "
                                "--out-json acc_work/r.json";
        if (ok && run_cli(few) != 0) {
            ok = false;
            why = "fewshot failed";
        }
        std::string csv1, json1, svg1;
        if (ok) {
            csv1 = slurp("acc_work/r.csv");
            json1 = slurp("acc_work/r.json");
            if (run_cli("report --in acc_work/r.csv --out-svg acc_work/r.svg") != 0) {
                ok = false;
                why = "report failed";
            }
            svg1 = slurp("acc_work/r.svg");
        }
        if (ok && (run_cli(few) != 0 ||
                   run_cli("report --in acc_work/r.csv --out-svg acc_work/r.svg") != 0)) {
            ok = false;
            why = "second CLI pass failed";
        }
        if (ok) {
            if (slurp("acc_work/r.csv") != csv1) {
                ok = false;
                why = "CSV bytes changed between identical runs";
            } else if (slurp("acc_work/r.json") != json1) {
                ok = false;
                why = "JSON bytes changed between identical runs";
            } else if (slurp("acc_work/r.svg") != svg1) {
                ok = false;
                why = "chart bytes changed between identical runs";
            }
        }
    }

    verdict(9, "CLI reruns byte-identical (CSV, JSON, chart); dataset and checkpoint round-trip bitwise",
            ok, why);
}

// --- 10: cost model ---------------------------------------------------------------

void criterion_flops() {
    bool ok = flops_estimate(256, 64, 128, 5) == 2146944ULL;
    std::string why = ok ? "" : "worked example mismatch";
    for (std::size_t batch = 1; ok && batch <= 64; batch *= 2) {
        if (flops_estimate(256, 64, 128, 5, 2 * batch) !=
            2 * flops_estimate(256, 64, 128, 5, batch)) {
            ok = false;
            why = "batch doubling not exact at " + std::to_string(batch);
        }
    }
    if (ok && flops_estimate(256, 64, 128, 5, 1, true) != 2 * 2146944ULL) {
        ok = false;
        why = "backward factor wrong";
    }
    verdict(10, "cost model: 2,146,944 MACs for the worked dims, exactly linear in batch",
            ok, why);
}

} // namespace

int main() {
    std::cout << "acceptance checks\n";
    const double t0 = now_s();
    criterion_gradient_oracle();
    criterion_hand_worked();
    criterion_zero_at_snapshot();
    criterion_reward_invariants();
    criterion_reductions();
    criterion_permutation_invariance();
    criterion_experiment();
    criterion_ablation();
    criterion_determinism_io();
    criterion_flops();
    const double elapsed = now_s() - t0;
    std::cout << (10 - g_failures) << "/10 criteria passed in " << fmt(elapsed) << "s\n";
    return g_failures == 0 ? 0 : 1;
}
