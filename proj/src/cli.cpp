#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "iso/bruteforce.hpp"
#include "iso/divergence.hpp"
#include "iso/duals.hpp"
#include "iso/envelope.hpp"
#include "iso/exponents.hpp"
#include "iso/problem.hpp"
#include "iso/transport.hpp"
#include "iso/verify.hpp"

namespace iso {

namespace {

std::vector<double> parse_grid(const std::string& s) {
  // "a:b:step" inclusive sweep, or a single number.
  std::vector<double> out;
  auto c1 = s.find(':');
  if (c1 == std::string::npos) {
    out.push_back(std::stod(s));
    return out;
  }
  auto c2 = s.find(':', c1 + 1);
  if (c2 == std::string::npos) throw problem_error(s, "expected a:b:step");
  double a = std::stod(s.substr(0, c1));
  double b = std::stod(s.substr(c1 + 1, c2 - c1 - 1));
  double step = std::stod(s.substr(c2 + 1));
  if (step <= 0.0 || b < a) throw problem_error(s, "need step > 0 and b >= a");
  for (double x = a; x <= b + 1e-12; x += step) out.push_back(std::min(x, b));
  return out;
}

struct Emitter {
  std::string dir;
  std::uint64_t seed;
  std::vector<ResultRow> rows;
  std::vector<std::string> files;

  void add(const std::string& quantity, double alpha, double tau, double lambda,
           size_t n, ExtReal value, const std::string& method, double ms) {
    ResultRow r;
    r.quantity = quantity;
    r.alpha = alpha;
    r.tau = tau;
    r.lambda = lambda;
    r.n = n;
    r.value = value;
    r.method = method;
    r.wall_ms = ms;
    rows.push_back(std::move(r));
    std::cout << quantity << " alpha=" << alpha << " tau=" << tau
              << " lambda=" << lambda << " n=" << n << " value="
              << format_value(value) << " (" << method << ")\n";
  }

  void curve(const ExponentCurve& c, const std::string& name) {
    std::filesystem::create_directories(dir);
    emit_curve(c, dir + "/" + name);
    files.push_back(name);
  }

  void finish() {
    std::filesystem::create_directories(dir);
    if (!rows.empty()) {
      std::ofstream out(dir + "/results.csv");
      out << "quantity,alpha,tau,lambda,n,value,method,wall_ms\n"
          << std::setprecision(17);
      for (const auto& r : rows)
        out << r.quantity << ',' << r.alpha << ',' << r.tau << ',' << r.lambda
            << ',' << r.n << ',' << format_value(r.value) << ',' << r.method
            << ',' << r.wall_ms << '\n';
      files.push_back("results.csv");
    }
    if (!files.empty()) write_manifest(dir, files, seed);
  }
};

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

ExponentCurve sweep(const std::vector<double>& alphas,
                    const std::vector<double>& taus,
                    const std::function<ExponentResult(double, double)>& f) {
  ExponentCurve curve;
  curve.alpha_grid = alphas;
  curve.tau_grid = taus;
  curve.values.resize(alphas.size());
  curve.method.resize(alphas.size());
  for (size_t i = 0; i < alphas.size(); ++i)
    for (double t : taus) {
      auto r = f(alphas[i], t);
      curve.values[i].push_back(r.value);
      curve.method[i].push_back(r.method);
    }
  return curve;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"finite-alphabet concentration and isoperimetry toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string problem_path, out_dir = "out";
  int threads = 1;  // accepted for interface stability; execution is sequential
  std::uint64_t seed = 1;
  bool seed_set = false;
  app.add_option("--problem", problem_path, "problem JSON file");
  app.add_option("--out-dir", out_dir, "output directory");
  app.add_option("--threads", threads, "worker budget");
  app.add_option("--seed", seed, "run seed")->each([&](const std::string&) {
    seed_set = true;
  });

  std::string kind, tau_s = "0.25", alpha_s = "0", lambda_s = "0.5", t_s = "0";
  std::string nlist_s = "1";
  double a_target = 0.5;
  auto* div = app.add_subcommand("divergence", "divergences between the marginals");
  auto* ot = app.add_subcommand("ot", "optimal transport between the marginals");
  auto* expc = app.add_subcommand("exponent", "primal exponent curves");
  expc->add_option("kind", kind)->required();
  auto* env = app.add_subcommand("envelope", "convex envelope of an exponent grid");
  auto* dual = app.add_subcommand("dual", "dual certificates");
  dual->add_option("kind", kind)->required();
  auto* bf = app.add_subcommand("bruteforce", "finite-n ground truth");
  bf->add_option("kind", kind)->required();
  auto* ver = app.add_subcommand("verify", "run the acceptance suite");
  for (auto* sc : {div, ot, expc, env, dual, bf}) {
    sc->add_option("--tau-grid,--tau", tau_s);
    sc->add_option("--alpha-grid,--alpha", alpha_s);
    sc->add_option("--lambda-grid,--lambda", lambda_s);
    sc->add_option("--t", t_s);
    sc->add_option("--n", nlist_s);
    sc->add_option("--a", a_target);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (ver->parsed()) {
      auto results = run_acceptance(std::cout);
      for (const auto& r : results)
        if (!r.passed) return 4;
      return 0;
    }

    if (problem_path.empty()) {
      std::cerr << "--problem is required\n";
      return 1;
    }
    ProblemSpec spec = parse_problem(problem_path);
    if (seed_set) spec.search.seed = seed;
    Emitter em{out_dir, spec.search.seed, {}, {}};
    auto taus = parse_grid(tau_s);
    auto alphas = parse_grid(alpha_s);
    auto lambdas = parse_grid(lambda_s);
    std::vector<size_t> ns;
    {
      std::stringstream ss(nlist_s);
      std::string tok;
      while (std::getline(ss, tok, ',')) ns.push_back(std::stoul(tok));
    }
    double t_val = std::stod(t_s);
    auto t0 = std::chrono::steady_clock::now();

    if (div->parsed()) {
      em.add("kl_xy", 0, 0, 0, 0, kl(spec.p_x, spec.p_y), "exact", ms_since(t0));
      em.add("kl_yx", 0, 0, 0, 0, kl(spec.p_y, spec.p_x), "exact", ms_since(t0));
      em.add("tv", 0, 0, 0, 0, ExtReal(tv(spec.p_x, spec.p_y)), "exact",
             ms_since(t0));
    } else if (ot->parsed()) {
      auto sol = ot_solve(spec.p_x, spec.p_y, spec.cost);
      em.add("ot", 0, 0, 0, 0, ExtReal(sol.value), "simplex", ms_since(t0));
      em.add("ot_residual", 0, 0, 0, 0, ExtReal(sol.coupling.marginal_residual()),
             "simplex", ms_since(t0));
      em.add("ot_slack", 0, 0, 0, 0,
             ExtReal(sol.potentials.feasibility_slack(spec.cost)), "simplex",
             ms_since(t0));
    } else if (expc->parsed() || env->parsed()) {
      ExponentCurve curve;
      if (env->parsed() || kind == "phi") {
        curve = sweep(alphas, taus, [&](double a, double t) {
          return phi_geq(a, t, spec.p_x, spec.p_y, spec.cost, spec.search);
        });
      } else if (kind == "varphi") {
        curve = sweep({0.0}, taus, [&](double, double t) {
          return varphi(t, spec.p_x, spec.p_y, spec.cost, spec.search);
        });
      } else if (kind == "varphi-x") {
        curve = sweep({0.0}, taus, [&](double, double t) {
          return varphi_x(t, spec.p_x, spec.cost, spec.search);
        });
      } else if (kind == "kappa") {
        curve = sweep(alphas, {0.0}, [&](double a, double) {
          ExponentResult r;
          r.value = kappa_x(a, spec.p_x, spec.cost, spec.search);
          r.method = "ball-sup";
          return r;
        });
      } else if (kind == "phi-lambda") {
        curve = sweep(lambdas, taus, [&](double lam, double t) {
          return phi_lambda_geq(t, lam, spec.p_x, spec.p_y, spec.cost, spec.search);
        });
      } else if (kind == "psi") {
        curve = sweep(alphas, taus, [&](double a, double t) {
          auto p = psi(a, t, spec.p_x, spec.p_y, spec.cost, spec.search);
          ExponentResult r;
          r.value = p.value;
          r.method = p.method;
          return r;
        });
      } else {
        std::cerr << "unknown exponent kind: " << kind << "\n";
        return 1;
      }
      em.curve(curve, "curve.csv");
      if (env->parsed()) {
        Envelope2D e2(curve);
        ExponentCurve ec = curve;
        for (size_t i = 0; i < alphas.size(); ++i)
          for (size_t j = 0; j < taus.size(); ++j) {
            ec.values[i][j] = e2.query(alphas[i], taus[j]);
            ec.method[i][j] = "envelope";
          }
        em.curve(ec, "envelope.csv");
      }
    } else if (dual->parsed()) {
      if (kind == "phi") {
        for (double a : alphas)
          for (double t : taus) {
            auto r = dual_phi_geq(a, t, spec.p_x, spec.p_y, spec.cost, spec.search);
            em.add("dual_phi", a, t, r.cert.lambda, 0, r.value, r.method,
                   ms_since(t0));
          }
      } else if (kind == "varphi") {
        for (double t : taus) {
          auto r = dual_varphi_geq(t, spec.p_x, spec.p_y, spec.cost, spec.search);
          em.add("dual_varphi", 0, t, r.cert.lambda, 0, r.value, r.method,
                 ms_since(t0));
        }
      } else if (kind == "varphi-x" || kind == "abs-r" || kind == "equiv") {
        if (!spec.metric)
          throw problem_error("metric", "this dual requires a metric cost");
        MetricSpace g(spec.cost, spec.p_x);
        if (kind == "varphi-x") {
          for (double t : taus) {
            auto r = dual_varphi_x(t, g, spec.search);
            em.add("dual_varphi_x", 0, t, r.cert.lambda, 0, r.value, r.method,
                   ms_since(t0));
          }
        } else if (kind == "abs-r") {
          for (double t : taus)
            em.add("abs_r", 0, t, 0, 0, ExtReal(abs_r(t, g)), "legendre",
                   ms_since(t0));
        } else {
          auto rep = check_equivalence(g, taus, spec.search);
          for (size_t j = 0; j < rep.taus.size(); ++j) {
            em.add("equiv_envelope", 0, rep.taus[j], 0, 0,
                   ExtReal(rep.envelope_vals[j]),
                   rep.exact_vertices ? "vertex-exact" : "heuristic", ms_since(t0));
            em.add("equiv_r", 0, rep.taus[j], 0, 0, ExtReal(rep.r_vals[j]),
                   "legendre", ms_since(t0));
          }
          em.add("equiv_max_gap", 0, rep.arg_tau, 0, 0, ExtReal(rep.max_gap),
                 "report", ms_since(t0));
        }
      } else if (kind == "psi") {
        for (double a : alphas)
          for (double t : taus) {
            auto prim = psi(a, t, spec.p_x, spec.p_y, spec.cost, spec.search);
            auto r = dual_psi(a, t, spec.p_x, spec.p_y, spec.cost,
                              psi_dual_candidates(prim, spec.cost));
            em.add("dual_psi", a, t, r.lambda, 0, r.value, "two-branch",
                   ms_since(t0));
          }
      } else {
        std::cerr << "unknown dual kind: " << kind << "\n";
        return 1;
      }
    } else if (bf->parsed()) {
      if (kind == "gamma") {
        for (size_t n : ns) {
          auto g = gamma_exhaustive(n, a_target, t_val, spec.p_x, spec.p_y,
                                    spec.cost, spec.search.seed);
          em.add("gamma", a_target, t_val, 0, n, ExtReal(g.value), g.method,
                 ms_since(t0));
        }
      } else if (kind == "levels") {
        for (size_t n : ns) {
          auto g = gamma_levels(n, a_target, t_val, spec.p_x[1]);
          em.add("gamma_levels", a_target, t_val, 0, n, ExtReal(g.value), "levels",
                 ms_since(t0));
        }
      } else if (kind == "strassen") {
        for (size_t n : ns) {
          auto r = strassen_gt(n, t_val, spec.p_x, spec.p_y, spec.cost);
          em.add("strassen_lp", 0, 0, 0, n, ExtReal(r.lp_value), "lp", ms_since(t0));
          em.add("strassen_set", 0, 0, 0, n, ExtReal(r.set_value), "subset",
                 ms_since(t0));
        }
      } else if (kind == "talagrand") {
        for (size_t n : ns) {
          std::vector<double> xs;
          std::vector<std::vector<ExtReal>> per_lambda;
          for (int k = 0; k <= 256; ++k) xs.push_back(double(k) / 256.0);
          for (double lam : lambdas) {
            std::vector<ExtReal> vs;
            for (double x : xs)
              vs.push_back(
                  phi_lambda_geq(x, lam, spec.p_x, spec.p_y, spec.cost).value);
            per_lambda.push_back(std::move(vs));
          }
          for (double t : taus) {
            auto envq = [&](double lam) -> ExtReal {
              for (size_t k = 0; k < lambdas.size(); ++k)
                if (std::fabs(lambdas[k] - lam) < 1e-12)
                  return lce_1d(xs, per_lambda[k])(t);
              return ExtReal::pos_inf();
            };
            auto rep = talagrand_sweep(n, lambdas, t, spec.p_x, spec.p_y,
                                       spec.cost, envq);
            em.add("talagrand_worst_slack", 0, t, rep.witness_lambda, n,
                   ExtReal(rep.worst_slack), "sweep", ms_since(t0));
          }
        }
      } else if (kind == "dimension-free") {
        auto curve = sweep(alphas, taus, [&](double a, double t) {
          return phi_geq(a, t, spec.p_x, spec.p_y, spec.cost, spec.search);
        });
        Envelope2D e2(curve);
        double step = taus.size() > 1 ? taus[1] - taus[0] : 1.0 / 16.0;
        for (size_t n : ns) {
          std::vector<double> tgrid;
          for (size_t t = 0; t <= n; ++t) tgrid.push_back(double(t) / double(n));
          auto rep = dimension_free_check(n, tgrid, spec.p_x, spec.p_y, spec.cost,
                                          e2, step, 1e-3, spec.search.seed);
          em.add("dimension_free_violations", 0, 0, 0, n,
                 ExtReal(double(rep.violations)), "check", ms_since(t0));
        }
      } else if (kind == "convergence") {
        double rref = abs_r(taus.front(),
                            MetricSpace(spec.cost, spec.p_x));
        auto table = convergence_report(ns, taus.front(), a_target, spec.p_x,
                                        spec.p_y, spec.cost, rref, rref);
        for (const auto& row : table.rows) {
          em.add("e0", a_target, taus.front(), 0, row.n, row.e0, row.method,
                 ms_since(t0));
          em.add("e1", a_target, taus.front(), 0, row.n, row.e1, row.method,
                 ms_since(t0));
        }
      } else {
        std::cerr << "unknown bruteforce kind: " << kind << "\n";
        return 1;
      }
    }
    em.finish();
    return 0;
  } catch (const problem_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "guard violation: " << e.what() << "\n";
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "guard violation: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace iso
