// tvwb: tree-name distances, synchronization deciders, Birkhoff
// decompositions and seeded Monte Carlo checkers for one-sided finite-state
// systems. See README.md for the document formats.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tvwb/dynsim.hpp"
#include "tvwb/json_io.hpp"
#include "tvwb/rng.hpp"
#include "tvwb/sha256.hpp"
#include "tvwb/tbar.hpp"

namespace {

using nlohmann::json;
using namespace tvwb;

struct Output {
    bool json_stdout = false;
    std::string out_path;
};

void add_output_flags(CLI::App* cmd, Output& out) {
    cmd->add_flag("--json", out.json_stdout, "print the JSON report on stdout");
    cmd->add_option("--out", out.out_path, "write the JSON report to this path");
}

void emit(const RunReport& report, const Output& out, const std::string& human) {
    json full = report_to_json(report);
    if (!out.out_path.empty()) {
        std::ofstream f(out.out_path, std::ios::binary);
        if (!f) fail(ErrorKind::io, "cannot write " + out.out_path);
        f << full.dump(2) << "\n";
    }
    if (out.json_stdout)
        std::cout << full.dump(2) << "\n";
    else
        std::cout << human;
}

std::string digest_files(const std::vector<std::string>& paths) {
    Sha256 h;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        std::string bytes = read_file_bytes(paths[i]);
        if (i) h.update("\0", 1);
        h.update(bytes.data(), bytes.size());
    }
    return "sha256:" + h.hex_digest();
}

std::vector<int> parse_heights(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string piece;
    while (std::getline(ss, piece, ',')) {
        auto dash = piece.find('-');
        if (dash != std::string::npos && dash > 0) {
            int lo = std::stoi(piece.substr(0, dash));
            int hi = std::stoi(piece.substr(dash + 1));
            for (int h = lo; h <= hi; ++h) out.push_back(h);
        } else if (!piece.empty()) {
            out.push_back(std::stoi(piece));
        }
    }
    if (out.empty()) fail(ErrorKind::invalid_input, "no heights given");
    return out;
}

std::string format_matrix(const std::vector<double>& m, int n,
                          const std::vector<std::string>& names) {
    std::ostringstream os;
    os << "        ";
    for (int j = 0; j < n; ++j) os << " " << names[j].substr(0, 11);
    os << "\n";
    for (int i = 0; i < n; ++i) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%-8s", names[i].substr(0, 8).c_str());
        os << buf;
        for (int j = 0; j < n; ++j) {
            std::snprintf(buf, sizeof buf, " %11.8f", m[static_cast<std::size_t>(i) * n + j]);
            os << buf;
        }
        os << "\n";
    }
    return os.str();
}

json prob_vector_json(const ProbVector& p) {
    json arr = json::array();
    if (p.has_exact())
        for (const auto& r : p.exact()) arr.push_back(r.str());
    else
        for (double c : p.components()) arr.push_back(c);
    return arr;
}

// ---------------------------------------------------------------- check-endo

int cmd_check_endo(const std::string& path, const Output& out) {
    json doc = load_json_file(path);
    std::vector<std::string> labels;
    StochasticMatrix m = parse_stochastic_doc(doc, &labels);

    auto endp = end_p_check(m);
    bool irr = irreducible(m);
    bool prim = irr && primitive(m);

    json results;
    results["states"] = m.n;
    results["endo"] = endp.ok();
    results["irreducible"] = irr;
    results["primitive"] = prim;
    if (endp.ok()) {
        results["p"] = prob_vector_json(*endp.p);
        results["entropy_bits"] = entropy(*endp.p);
    } else {
        results["rejection"] = {{"row", endp.rejection->row},
                                {"reason", endp.rejection->reason}};
    }
    if (irr) {
        json q = json::array();
        for (double v : stationary(m)) q.push_back(v);
        results["stationary"] = q;
    }

    std::ostringstream human;
    human << "matrix: " << m.n << " states\n";
    if (endp.ok()) {
        human << "p-endomorphism: yes, p = (";
        const auto& p = *endp.p;
        for (int i = 0; i < p.size(); ++i)
            human << (i ? ", " : "")
                  << (p.has_exact() ? p.exact()[i].str() : std::to_string(p.component(i + 1)));
        human << ")\n";
        human << "entropy: " << entropy(p) << " bits\n";
    } else {
        human << "p-endomorphism: no (" << endp.rejection->reason;
        if (endp.rejection->row) human << ", row " << endp.rejection->row;
        human << ")\n";
    }
    human << "irreducible: " << (irr ? "yes" : "no") << "\n";
    human << "primitive: " << (prim ? "yes" : "no") << "\n";
    if (irr) {
        human << "stationary: (";
        auto q = stationary(m);
        for (std::size_t i = 0; i < q.size(); ++i) human << (i ? ", " : "") << q[i];
        human << ")\n";
    }

    RunReport report{"check-endo", digest_files({path}), results, false, 0};
    emit(report, out, human.str());
    return endp.ok() && irr ? 0 : 1;
}

// --------------------------------------------------------------- decide-tvwb

json witness_json(const TvwbWitness& w, const PreimageGraph& g) {
    json out;
    out["symbols"] = w.symbols;
    out["weights"] = w.weights;
    out["endpoint"] = g.state_names[w.common_endpoint];
    json paths = json::array();
    for (int u = 0; u < g.n_states; ++u) {
        json path = json::array();
        for (auto [sym, next] : w.paths[u])
            path.push_back({{"symbol", sym}, {"state", g.state_names[next]}});
        paths.push_back({{"start", g.state_names[u]}, {"steps", path}});
    }
    out["paths"] = paths;
    return out;
}

int cmd_decide(const std::string& path, const Output& out) {
    json doc = load_json_file(path);
    SystemDescriptor d = parse_system_doc(doc);
    if (d.kind == SystemKind::circle_extension)
        fail(ErrorKind::invalid_input, "undecidable kind; use estimate-tvwb");

    json results;
    results["kind"] = kind_name(d.kind);
    if (d.kind == SystemKind::markov) {
        auto mixing = sufficient_mixing_uniform(*d.matrix);
        results["sufficient_mixing_uniform"] = mixing ? json(*mixing) : json(nullptr);
        results["sufficient_shared_entries"] = sufficient_shared_entries(*d.matrix);
    }

    PreimageGraph g = d.graph();
    TvwbVerdict v = decide_tvwb(g);
    results["states"] = g.n_states;
    results["decision"] = v.decision;
    results["path_length_bound"] = v.length_bound.str();
    results["bfs_depth"] = v.depth;
    if (v.decision) {
        results["witness"] = witness_json(*v.witness, g);
    } else {
        json cert = json::array();
        for (const auto& set : v.certificate) {
            json names = json::array();
            for (int s : set) names.push_back(g.state_names[s]);
            cert.push_back(names);
        }
        results["certificate"] = cert;
    }

    std::ostringstream human;
    human << "system: " << kind_name(d.kind) << ", " << g.n_states << " states\n";
    human << "tvwB: " << (v.decision ? "true" : "false") << "\n";
    human << "subset-BFS depth: " << v.depth << "   path-length bound N^(3N): "
          << v.length_bound.str() << "\n";
    if (v.decision) {
        human << "witness weights:";
        for (double w : v.witness->weights) human << " " << w;
        human << "\nendpoint: " << g.state_names[v.witness->common_endpoint] << "\n";
    } else {
        human << "certificate (closed family of endpoint sets, no singleton):\n";
        for (const auto& set : v.certificate) {
            human << "  {";
            for (std::size_t i = 0; i < set.size(); ++i)
                human << (i ? "," : "") << g.state_names[set[i]];
            human << "}\n";
        }
    }

    RunReport report{"decide-tvwb", digest_files({path}), results, false, 0};
    emit(report, out, human.str());
    return 0;
}

// ---------------------------------------------------------- tbar / distances

json tbar_result_json(const TbarResult& r) {
    json out;
    out["value"] = r.value;
    out["height"] = r.height;
    json perms = json::array();
    const TreeIndex& idx = r.witness.index();
    for (std::int64_t u = 0; u < idx.internal_count(); ++u) {
        bool trivial = true;
        for (int b = 1; b <= r.witness.p().size() && trivial; ++b)
            trivial = r.witness.perm(u, b) == b;
        if (trivial) continue;
        json images = json::array();
        for (int b = 1; b <= r.witness.p().size(); ++b) images.push_back(r.witness.perm(u, b));
        perms.push_back({{"node", idx.node_label(u)}, {"images", images}});
    }
    out["witness"] = perms;
    return out;
}

int cmd_state_distance(const std::string& path, const std::string& heights_spec,
                       const Output& out, const char* command) {
    json doc = load_json_file(path);
    SystemDescriptor d = doc.contains("kind")
                             ? parse_system_doc(doc)
                             : SystemDescriptor::make_markov(parse_stochastic_doc(doc, nullptr));
    if (d.kind == SystemKind::circle_extension)
        fail(ErrorKind::invalid_input, "circle extensions have no finite state space");
    PreimageGraph g = d.graph();
    auto heights = parse_heights(heights_spec);
    StateDistanceTable table = tbar_states(g, heights);

    json results;
    results["states"] = table.state_names;
    results["heights"] = table.heights;
    json mats = json::array();
    json maxes = json::array();
    std::ostringstream human;
    for (std::size_t hi = 0; hi < table.heights.size(); ++hi) {
        mats.push_back(matrix_to_json(table.matrices[hi], table.n_states, table.n_states));
        double mx = 0.0;
        for (int a = 0; a < table.n_states; ++a)
            for (int b = 0; b < table.n_states; ++b)
                if (a != b)
                    mx = std::max(mx,
                                  table.matrices[hi][static_cast<std::size_t>(a) * table.n_states + b]);
        maxes.push_back(mx);
        human << "height " << table.heights[hi] << " (max off-diagonal " << mx << "):\n"
              << format_matrix(table.matrices[hi], table.n_states, table.state_names) << "\n";
    }
    results["matrices"] = mats;
    results["max_offdiagonal"] = maxes;

    RunReport report{command, digest_files({path}), results, false, 0};
    emit(report, out, human.str());
    return 0;
}

int cmd_tbar(const std::vector<std::string>& paths, bool brute, bool states,
             const std::string& heights_spec, const Output& out) {
    if (states) {
        if (paths.size() != 1)
            fail(ErrorKind::invalid_input, "--states takes one system document");
        return cmd_state_distance(paths[0], heights_spec, out, "tbar");
    }
    if (paths.size() != 2)
        fail(ErrorKind::invalid_input, "tbar takes two tree-name documents");
    TreeName a = parse_tree_name_doc(load_json_file(paths[0]));
    TreeName b = parse_tree_name_doc(load_json_file(paths[1]));
    TbarResult r = tbar_exact(a, b);

    json results = tbar_result_json(r);
    std::ostringstream human;
    human << "tbar_" << r.height << " = " << r.value << "\n";
    if (brute) {
        TbarResult rb = tbar_bruteforce(a, b);
        results["brute_force_value"] = rb.value;
        results["agreement"] = std::abs(rb.value - r.value) <= 1e-12;
        human << "brute force = " << rb.value << " (|delta| = " << std::abs(rb.value - r.value)
              << ")\n";
    }
    RunReport report{"tbar", digest_files(paths), results, false, 0};
    emit(report, out, human.str());
    return 0;
}

// ------------------------------------------------------------------ birkhoff

int cmd_birkhoff(const std::string& path, bool block, const Output& out) {
    json doc = load_json_file(path);
    json results;
    std::ostringstream human;
    if (block) {
        BlockCoupling c = parse_block_coupling_doc(doc);
        auto terms = block_decompose(c);
        int s = c.p.size();
        // pushforward through "entry mass at (v,u)" must reproduce the coupling
        std::vector<double> acc(static_cast<std::size_t>(s) * s, 0.0);
        for (const auto& t : terms)
            for (int b = 1; b <= s; ++b)
                acc[static_cast<std::size_t>(b - 1) * s + (t.images[b - 1] - 1)] +=
                    t.probability * c.p.component(b);
        double residual = 0.0;
        for (std::size_t i = 0; i < acc.size(); ++i)
            residual = std::max(residual, std::abs(acc[i] - c.entries[i]));

        json jterms = json::array();
        for (const auto& t : terms) {
            json images = json::array();
            for (auto v : t.images) images.push_back(static_cast<int>(v));
            jterms.push_back({{"probability", t.probability}, {"permutation", images}});
        }
        results["terms"] = jterms;
        results["residual"] = residual;
        human << terms.size() << " class-preserving permutations, reconstruction residual "
              << residual << "\n";
        for (const auto& t : terms) {
            human << "  " << t.probability << " * (";
            for (int b = 1; b <= s; ++b) human << (b > 1 ? " " : "") << int(t.images[b - 1]);
            human << ")\n";
        }
    } else {
        require_schema(doc);
        if (!doc.contains("matrix")) fail(ErrorKind::parse, "document lacks \"matrix\"");
        ParsedGrid grid = parse_grid(doc["matrix"]);
        if (grid.rows != grid.cols) fail(ErrorKind::parse, "matrix must be square");
        BirkhoffDecomposition d = birkhoff_decompose(grid.values, grid.rows);
        double residual = reconstruction_residual(d, grid.values);
        json jterms = json::array();
        for (const auto& t : d.terms) {
            json perm = json::array();
            for (int c : t.perm) perm.push_back(c + 1);
            jterms.push_back({{"coefficient", t.coefficient}, {"permutation", perm}});
        }
        results["alpha"] = d.alpha;
        results["terms"] = jterms;
        results["term_count"] = d.terms.size();
        results["residual"] = residual;
        human << d.terms.size() << " terms, alpha = " << d.alpha
              << ", reconstruction residual " << residual << "\n";
        for (const auto& t : d.terms) {
            human << "  " << t.coefficient << " * (";
            for (std::size_t i = 0; i < t.perm.size(); ++i)
                human << (i ? " " : "") << t.perm[i] + 1;
            human << ")\n";
        }
    }
    RunReport report{"birkhoff", digest_files({path}), results, false, 0};
    emit(report, out, human.str());
    return 0;
}

// --------------------------------------------------- estimate / generic-check

int cmd_estimate(const std::string& path, const std::string& heights_spec, int samples,
                 int pairs, std::uint64_t seed, const Output& out) {
    SystemDescriptor d = parse_system_doc(load_json_file(path));
    auto heights = parse_heights(heights_spec);
    TvwbProfile prof = estimate_tvwb_profile(d, heights, samples, pairs, seed);

    json results;
    results["heights"] = prof.heights;
    results["eps_hat"] = prof.eps_hat;
    results["mean_distance"] = prof.mean_distance;
    results["samples"] = prof.samples;
    results["pairs"] = prof.pairs;

    std::ostringstream human;
    human << "height  eps_hat  mean_tbar\n";
    for (std::size_t i = 0; i < prof.heights.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%6d  %7.2f  %9.6f\n", prof.heights[i], prof.eps_hat[i],
                      prof.mean_distance[i]);
        human << buf;
    }
    RunReport report{"estimate-tvwb", digest_files({path}), results, true, seed};
    emit(report, out, human.str());
    return 0;
}

int cmd_generic(const std::string& path, int levels, int samples, std::uint64_t seed,
                const Output& out) {
    SystemDescriptor d = parse_system_doc(load_json_file(path));
    if (d.kind == SystemKind::circle_extension)
        fail(ErrorKind::invalid_input, "circle extensions have no finite preimage graph");

    json rows = json::array();
    double worst = 0.0;
    std::ostringstream human;
    human << "sample  start  deviation\n";
    json reference;
    for (int i = 0; i < samples; ++i) {
        PointSample x = sample_point(d, 4, derive_seed(seed, stream::sample_points, i));
        GenericityReport rep = genericity(d, x, levels);
        worst = std::max(worst, rep.deviation);
        json theta = json::array();
        for (double t : rep.theta) theta.push_back(t);
        rows.push_back({{"sample", i},
                        {"start_state", rep.start_state + 1},
                        {"theta", theta},
                        {"deviation", rep.deviation}});
        if (i == 0) {
            reference = json::array();
            for (double t : rep.reference) reference.push_back(t);
        }
        char buf[64];
        std::snprintf(buf, sizeof buf, "%6d  %5d  %9.6f\n", i, rep.start_state + 1,
                      rep.deviation);
        human << buf;
    }
    json results;
    results["levels"] = levels;
    results["rows"] = rows;
    results["reference"] = reference;
    results["max_deviation"] = worst;
    human << "max deviation: " << worst << "\n";

    RunReport report{"generic-check", digest_files({path}), results, true, seed};
    emit(report, out, human.str());
    return 0;
}

int cmd_sync_bound(int states, const Output& out) {
    BigUint bound = sync_bound(states);
    json results;
    results["states"] = states;
    results["bound"] = bound.str();
    std::ostringstream human;
    human << states << "^(3*" << states << ") = " << bound.str() << "\n";
    RunReport report{"sync-bound", "sha256:" + Sha256::of(std::to_string(states)), results,
                     false, 0};
    emit(report, out, human.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tree-name distance and synchronization toolkit"};
    app.require_subcommand(1);

    Output out;

    std::string path, path2, heights = "1-8";
    int samples = 32, pairs = 100, levels = 1000, states = 2;
    std::uint64_t seed = 1;
    bool brute = false, states_mode = false, block = false;

    auto* c_endo = app.add_subcommand("check-endo", "p-endomorphism and mixing report");
    c_endo->add_option("file", path, "matrix document")->required();
    add_output_flags(c_endo, out);

    auto* c_decide = app.add_subcommand("decide-tvwb", "synchronizing-sequence decision");
    c_decide->add_option("file", path, "system document")->required();
    add_output_flags(c_decide, out);

    auto* c_tbar = app.add_subcommand("tbar", "distance between two tree names");
    c_tbar->add_option("files", path, "tree-name document")->required();
    c_tbar->add_option("file2", path2, "second tree-name document");
    c_tbar->add_flag("--brute-force", brute, "cross-check against exhaustive enumeration");
    c_tbar->add_flag("--states", states_mode, "treat the input as a system document");
    c_tbar->add_option("--heights", heights, "heights for --states (e.g. 1-12 or 2,4,8)");
    add_output_flags(c_tbar, out);

    auto* c_sd = app.add_subcommand("state-distance", "per-height state tree-name distances");
    c_sd->add_option("file", path, "system or matrix document")->required();
    c_sd->add_option("--heights", heights, "heights (e.g. 1-12 or 2,4,8)");
    add_output_flags(c_sd, out);

    auto* c_birk = app.add_subcommand("birkhoff", "convex decomposition into permutations");
    c_birk->add_option("file", path, "matrix or coupling document")->required();
    c_birk->add_flag("--block", block, "decompose a weight-class block coupling");
    add_output_flags(c_birk, out);

    auto* c_est = app.add_subcommand("estimate-tvwb", "Monte Carlo eps-hat profile");
    c_est->add_option("file", path, "system document")->required();
    c_est->add_option("--heights", heights, "heights (e.g. 2,4,8,12)");
    c_est->add_option("--samples", samples, "points to sample");
    c_est->add_option("--pairs", pairs, "point pairs to compare");
    c_est->add_option("--seed", seed, "RNG seed");
    add_output_flags(c_est, out);

    auto* c_gen = app.add_subcommand("generic-check", "tree-average genericity deviations");
    c_gen->add_option("file", path, "system document")->required();
    c_gen->add_option("--levels", levels, "tree depth M");
    c_gen->add_option("--samples", samples, "points to sample");
    c_gen->add_option("--seed", seed, "RNG seed");
    add_output_flags(c_gen, out);

    auto* c_sync = app.add_subcommand("sync-bound", "path-length bound N^(3N)");
    c_sync->add_option("states", states, "number of states")->required();
    add_output_flags(c_sync, out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (c_endo->parsed()) return cmd_check_endo(path, out);
        if (c_decide->parsed()) return cmd_decide(path, out);
        if (c_tbar->parsed()) {
            std::vector<std::string> paths{path};
            if (!path2.empty()) paths.push_back(path2);
            return cmd_tbar(paths, brute, states_mode, heights, out);
        }
        if (c_sd->parsed()) return cmd_state_distance(path, heights, out, "state-distance");
        if (c_birk->parsed()) return cmd_birkhoff(path, block, out);
        if (c_est->parsed()) return cmd_estimate(path, heights, samples, pairs, seed, out);
        if (c_gen->parsed()) return cmd_generic(path, levels, samples, seed, out);
        if (c_sync->parsed()) return cmd_sync_bound(states, out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return (e.kind() == ErrorKind::parse || e.kind() == ErrorKind::io) ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
