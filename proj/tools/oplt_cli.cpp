// Command-line front end: train / test / progressive / properness-check / synth.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oplt/oplt_all.hpp"

namespace {

struct Timer {
    std::chrono::steady_clock::time_point wall = std::chrono::steady_clock::now();
    std::clock_t cpu = std::clock();

    double wall_s() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - wall).count();
    }
    double cpu_s() const {
        return static_cast<double>(std::clock() - cpu) / CLOCKS_PER_SEC;
    }
};

std::vector<std::size_t> parse_size_list(const std::string& s) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t end = s.find(',', pos);
        if (end == std::string::npos) end = s.size();
        out.push_back(std::stoull(s.substr(pos, end - pos)));
        pos = end + 1;
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t end = s.find(',', pos);
        if (end == std::string::npos) end = s.size();
        out.push_back(std::stod(s.substr(pos, end - pos)));
        pos = end + 1;
    }
    return out;
}

void normalize_all(std::vector<oplt::Example>& data) {
    for (auto& ex : data) ex.features = ex.features.normalized();
}

struct CommonOpts {
    double lr = 1.0;
    double eps = 0.01;
    bool bias = true;
    bool normalize = true;
    std::string policy = "best-greedy";
    double alpha = 0.75;
    std::uint32_t arity = 2;
    std::uint32_t preleaf_arity = 100;
    std::uint64_t seed = 1;
    std::string aux = "all";

    oplt::LearnerConfig learner() const { return {lr, eps, bias}; }
    oplt::PolicyConfig policy_config() const {
        oplt::PolicyConfig pc;
        pc.kind = policy == "random" ? oplt::PolicyKind::kRandom : oplt::PolicyKind::kBestGreedy;
        pc.alpha = alpha;
        pc.arity = arity;
        pc.preleaf_arity = preleaf_arity;
        pc.rng_seed = seed;
        pc.aux = aux == "prune" ? oplt::AuxRetention::kPrune : oplt::AuxRetention::kAll;
        return pc;
    }
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--lr", o.lr, "learning rate (default 1, as in the reference setup)");
    cmd->add_option("--eps", o.eps, "AdaGrad epsilon (default 0.01)");
    cmd->add_flag("--bias,!--no-bias", o.bias, "include a bias coordinate (default on)");
    cmd->add_flag("--normalize,!--no-normalize", o.normalize,
                  "L2-normalize features for training and prediction (default on)");
    cmd->add_option("--policy", o.policy, "tree building policy: random | best-greedy")
        ->check(CLI::IsMember({"random", "best-greedy"}));
    cmd->add_option("--alpha", o.alpha, "best-greedy balance weight in [0,1] (default 0.75)");
    cmd->add_option("-b,--arity", o.arity, "max internal node arity b (default 2)");
    cmd->add_option("--b-max,--preleaf-arity", o.preleaf_arity,
                    "max pre-leaf arity b_max (default 100; 10 suits few-shot streams)");
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--aux", o.aux, "auxiliary classifier retention: all | prune")
        ->check(CLI::IsMember({"all", "prune"}));
}

int cmd_train(const std::string& data_path, const std::string& model_path, const CommonOpts& o,
              const std::string& mode, const std::string& tree_kind, int passes, double warm_start,
              bool shuffle, bool strip_aux, const std::string& dump_tree) {
    Timer timer;
    auto ds = oplt::load_dataset_file(data_path,
                                      shuffle ? std::optional<std::uint64_t>(o.seed) : std::nullopt);
    if (ds.count_mismatch)
        std::cerr << "warning: header example count " << ds.header.num_examples
                  << " does not match file (" << ds.examples.size() << " read)\n";
    if (o.normalize) normalize_all(ds.examples);

    oplt::OpltModel model = [&] {
        if (mode == "iplt") {
            std::vector<oplt::LabelId> labels;
            for (const auto& ex : ds.examples) labels.insert(labels.end(), ex.labels.begin(), ex.labels.end());
            oplt::canonicalize_labels(labels);
            oplt::LabelTree tree =
                tree_kind == "balanced"
                    ? oplt::build_balanced_tree(labels, o.arity, o.preleaf_arity, o.seed)
                    : oplt::build_kmeans_tree(oplt::label_representations(ds.examples),
                                              o.preleaf_arity, o.seed);
            auto m = oplt::OpltModel::with_fixed_tree(std::move(tree), o.learner(), o.policy_config(),
                                                      o.normalize, /*with_aux=*/false);
            m.train_stream(ds.examples, passes);
            return m;
        }
        if (warm_start > 0.0) {
            auto m = oplt::OpltModel::warm_start(ds.examples, warm_start, o.learner(),
                                                 o.policy_config(), o.normalize);
            const std::size_t prefix = oplt::OpltModel::prefix_count(warm_start, ds.examples.size());
            std::span<const oplt::Example> rest(ds.examples.begin() + prefix, ds.examples.end());
            m.train_stream(rest, 1);
            for (int p = 1; p < passes; ++p) m.train_stream(ds.examples, 1);
            return m;
        }
        auto m = oplt::OpltModel::init(o.learner(), o.policy_config(), o.normalize);
        m.train_stream(ds.examples, passes);
        return m;
    }();

    if (strip_aux) model.strip_aux();
    oplt::save_model_file(model, model_path);
    if (!dump_tree.empty()) {
        std::ofstream os(dump_tree);
        model.tree().dump(os);
    }
    std::printf("trained %s model: %zu nodes, depth %zu, %zu labels, %llu updates\n", mode.c_str(),
                model.tree().size(), model.tree().depth(), model.tree().num_labels(),
                static_cast<unsigned long long>(model.update_count()));
    std::printf("time: wall %.2fs, cpu %.2fs\n", timer.wall_s(), timer.cpu_s());
    return 0;
}

int cmd_test(const std::string& data_path, const std::string& model_path, const std::string& k_list,
             double psp_a, double psp_b, const std::string& output) {
    const oplt::OpltModel model = oplt::load_model_file(model_path);
    auto ds = oplt::load_dataset_file(data_path);
    if (model.normalize_features()) normalize_all(ds.examples);
    const std::vector<std::size_t> ks = parse_size_list(k_list);
    const std::size_t kmax = *std::max_element(ks.begin(), ks.end());

    const bool with_psp = psp_a > 0.0;
    oplt::PropensityModel prop;
    if (with_psp)
        prop = oplt::PropensityModel::from_counts(psp_a, psp_b, model.examples_seen(),
                                                  model.label_counts());

    std::vector<double> p_sum(ks.size(), 0.0), psp_sum(ks.size(), 0.0);
    Timer timer;
    for (const auto& ex : ds.examples) {
        const auto pred =
            oplt::predict_topk(model.tree(), model.regular(), ex.features, kmax, model.learner());
        for (std::size_t i = 0; i < ks.size(); ++i) {
            p_sum[i] += oplt::precision_at_k(pred, ex.labels, ks[i]);
            if (with_psp) psp_sum[i] += oplt::psp_at_k(pred, ex.labels, ks[i], prop);
        }
    }
    const double per_example_ms =
        ds.examples.empty() ? 0.0 : timer.wall_s() * 1000.0 / static_cast<double>(ds.examples.size());

    std::string report;
    char line[64];
    for (std::size_t i = 0; i < ks.size(); ++i) {
        std::snprintf(line, sizeof(line), "P@%zu,%.6f\n", ks[i],
                      p_sum[i] / static_cast<double>(ds.examples.size()));
        report += line;
    }
    if (with_psp)
        for (std::size_t i = 0; i < ks.size(); ++i) {
            std::snprintf(line, sizeof(line), "PSP@%zu,%.6f\n", ks[i],
                          psp_sum[i] / static_cast<double>(ds.examples.size()));
            report += line;
        }
    if (output.empty()) {
        std::fputs(report.c_str(), stdout);
    } else {
        std::ofstream os(output);
        os << report;
        if (!os) throw std::runtime_error("cannot write report: " + output);
    }
    std::printf("tested %zu examples, mean prediction time %.3f ms\n", ds.examples.size(),
                per_example_ms);
    return 0;
}

int cmd_progressive(const std::string& data_path, const std::string& output, const CommonOpts& o,
                    const std::string& checkpoints, std::uint64_t checkpoint_step, bool shuffle) {
    auto ds = oplt::load_dataset_file(data_path,
                                      shuffle ? std::optional<std::uint64_t>(o.seed) : std::nullopt);
    if (o.normalize) normalize_all(ds.examples);

    std::vector<std::uint64_t> cps;
    if (!checkpoints.empty()) {
        for (std::size_t c : parse_size_list(checkpoints)) cps.push_back(c);
    } else {
        for (std::uint64_t c = checkpoint_step; c < ds.examples.size(); c += checkpoint_step)
            cps.push_back(c);
    }

    auto model = oplt::OpltModel::init(o.learner(), o.policy_config(), o.normalize);
    Timer timer;
    const auto curve = oplt::progressive_validate(model, ds.examples, cps);

    std::string csv = "t,accuracy,bits\n";
    char line[96];
    for (const auto& p : curve) {
        if (p.bits)
            std::snprintf(line, sizeof(line), "%llu,%.6f,%.6f\n",
                          static_cast<unsigned long long>(p.t), p.accuracy, *p.bits);
        else
            std::snprintf(line, sizeof(line), "%llu,%.6f,\n",
                          static_cast<unsigned long long>(p.t), p.accuracy);
        csv += line;
    }
    if (output.empty()) {
        std::fputs(csv.c_str(), stdout);
    } else {
        std::ofstream os(output);
        os << csv;
        if (!os) throw std::runtime_error("cannot write curve: " + output);
    }
    if (!curve.empty())
        std::printf("progressive accuracy %.4f after %llu examples (wall %.2fs, cpu %.2fs)\n",
                    curve.back().accuracy, static_cast<unsigned long long>(curve.back().t),
                    timer.wall_s(), timer.cpu_s());
    return 0;
}

int cmd_properness(const std::string& data_path, std::size_t limit, const CommonOpts& o,
                   std::size_t synth_examples, std::uint32_t synth_labels,
                   std::uint32_t synth_features, const std::string& alpha_sweep,
                   const std::string& prefixes) {
    std::vector<oplt::Example> stream;
    if (!data_path.empty()) {
        auto ds = oplt::load_dataset_file(data_path);
        stream = std::move(ds.examples);
        if (limit > 0 && stream.size() > limit) stream.resize(limit);
    } else {
        oplt::SynthConfig sc;
        sc.num_examples = synth_examples;
        sc.num_labels = synth_labels;
        sc.num_features = synth_features;
        sc.seed = o.seed;
        stream = oplt::make_synthetic_stream(sc);
    }
    if (o.normalize) normalize_all(stream);

    std::vector<double> alphas =
        alpha_sweep.empty() ? std::vector<double>{o.alpha} : parse_double_list(alpha_sweep);
    std::vector<std::size_t> prefix_list;
    if (!prefixes.empty()) prefix_list = parse_size_list(prefixes);

    bool all_pass = true;
    for (double alpha : alphas) {
        CommonOpts run = o;
        run.alpha = alpha;
        const auto rep = oplt::check_properness(stream, run.learner(), run.policy_config(),
                                                prefix_list);
        all_pass &= rep.pass;
        std::printf("%s policy=%s alpha=%.2f b=%u b_max=%u: %zu prefixes, update ratio %.3f "
                    "(online %llu / reference %llu), max descent %zu <= depth %zu\n",
                    rep.pass ? "PASS" : "FAIL", run.policy.c_str(), alpha, o.arity, o.preleaf_arity,
                    rep.prefixes_checked, rep.max_update_ratio,
                    static_cast<unsigned long long>(rep.online_updates),
                    static_cast<unsigned long long>(rep.reference_updates), rep.max_descent_visits,
                    rep.max_tree_depth_at_descent);
        if (!rep.pass) std::printf("  %s\n", rep.failure.c_str());
    }
    return all_pass ? 0 : 1;
}

int cmd_synth(const std::string& output, std::size_t examples, std::uint32_t labels,
              std::uint32_t features, bool multiclass, std::uint64_t seed) {
    oplt::SynthConfig sc;
    sc.num_examples = examples;
    sc.num_labels = labels;
    sc.num_features = features;
    if (multiclass) sc.min_labels = sc.max_labels = 1;
    sc.seed = seed;
    const auto stream = oplt::make_synthetic_stream(sc);

    std::ofstream os(output);
    if (!os) throw std::runtime_error("cannot write dataset: " + output);
    os << stream.size() << ' ' << features << ' ' << labels << '\n';
    for (const auto& ex : stream) os << oplt::serialize_example(ex) << '\n';
    std::printf("wrote %zu examples to %s\n", stream.size(), output.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online probabilistic label trees for extreme multi-label classification"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "train a model and save it");
    std::string train_data, train_model, mode = "oplt", tree_kind = "kmeans", dump_tree;
    CommonOpts train_opts;
    int passes = 1;
    double warm_start = 0.0;
    bool shuffle = false, strip_aux = false;
    train->add_option("--data", train_data, "training set (XMLC text format)")->required();
    train->add_option("--model", train_model, "output model path")->required();
    train->add_option("--mode", mode, "oplt (online tree) or iplt (fixed offline tree)")
        ->check(CLI::IsMember({"oplt", "iplt"}));
    train->add_option("--tree", tree_kind, "offline tree for --mode iplt: balanced | kmeans")
        ->check(CLI::IsMember({"balanced", "kmeans"}));
    train->add_option("--passes", passes, "passes over the training data (default 1)");
    train->add_option("--warm-start", warm_start,
                      "fraction in (0,1): build a 2-means tree on this prefix, then continue online");
    train->add_flag("--shuffle", shuffle, "shuffle the training set with --seed");
    train->add_flag("--strip-aux", strip_aux, "save a prediction-only model without auxiliary state");
    train->add_option("--dump-tree", dump_tree, "write a text dump of the tree (id parent label)");
    add_common(train, train_opts);

    // test
    auto* test = app.add_subcommand("test", "evaluate a model on a test set");
    std::string test_data, test_model, k_list = "1,3,5", report_out;
    double psp_a = 0.0, psp_b = 0.0;
    test->add_option("--data", test_data, "test set")->required();
    test->add_option("--model", test_model, "model path")->required();
    test->add_option("--k", k_list, "comma list of cutoffs (default 1,3,5)");
    test->add_option("--psp-a", psp_a, "propensity parameter A (enables PSP@k)");
    test->add_option("--psp-b", psp_b, "propensity parameter B");
    test->add_option("--output", report_out, "report file (metric,value per line); stdout if omitted");

    // progressive
    auto* prog = app.add_subcommand("progressive", "test-then-train over a multi-class stream");
    std::string prog_data, prog_out, checkpoints;
    std::uint64_t checkpoint_step = 5000;
    CommonOpts prog_opts;
    bool prog_shuffle = false;
    prog->add_option("--data", prog_data, "stream (one label per example)")->required();
    prog->add_option("--output", prog_out, "CSV output \"t,accuracy,bits\"; stdout if omitted");
    prog->add_option("--checkpoints", checkpoints, "explicit comma list of checkpoints");
    prog->add_option("--checkpoint-step", checkpoint_step, "emit every N examples (default 5000)");
    prog->add_flag("--shuffle", prog_shuffle, "shuffle the stream with --seed");
    add_common(prog, prog_opts);

    // properness-check
    auto* propc = app.add_subcommand(
        "properness-check", "verify the online model equals the incremental reference, bitwise");
    std::string propc_data, alpha_sweep, prefixes;
    std::size_t propc_limit = 0, synth_examples = 200;
    std::uint32_t synth_labels = 30, synth_features = 50;
    CommonOpts propc_opts;
    propc->add_option("--data", propc_data, "stream file; omit to use the synthetic generator");
    propc->add_option("--limit", propc_limit, "use only the first N examples of --data");
    propc->add_option("--synthetic-examples", synth_examples, "synthetic stream length (default 200)");
    propc->add_option("--synthetic-labels", synth_labels, "synthetic label count (default 30)");
    propc->add_option("--synthetic-features", synth_features, "synthetic feature count (default 50)");
    propc->add_option("--alpha-sweep", alpha_sweep, "comma list of alphas to check in turn");
    propc->add_option("--prefixes", prefixes, "ascending comma list of prefixes (default: every)");
    add_common(propc, propc_opts);

    // synth
    auto* synth = app.add_subcommand("synth", "write a seeded synthetic dataset");
    std::string synth_out;
    std::size_t sx_examples = 1000;
    std::uint32_t sx_labels = 50, sx_features = 100;
    std::uint64_t sx_seed = 1;
    bool sx_multiclass = false;
    synth->add_option("--output", synth_out, "dataset path")->required();
    synth->add_option("--examples", sx_examples, "number of examples");
    synth->add_option("--labels", sx_labels, "number of labels");
    synth->add_option("--features", sx_features, "number of features");
    synth->add_flag("--multiclass", sx_multiclass, "exactly one label per example");
    synth->add_option("--seed", sx_seed, "RNG seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // usage errors exit 2
    }

    try {
        if (*train)
            return cmd_train(train_data, train_model, train_opts, mode, tree_kind, passes,
                             warm_start, shuffle, strip_aux, dump_tree);
        if (*test) return cmd_test(test_data, test_model, k_list, psp_a, psp_b, report_out);
        if (*prog)
            return cmd_progressive(prog_data, prog_out, prog_opts, checkpoints, checkpoint_step,
                                   prog_shuffle);
        if (*propc)
            return cmd_properness(propc_data, propc_limit, propc_opts, synth_examples, synth_labels,
                                  synth_features, alpha_sweep, prefixes);
        if (*synth)
            return cmd_synth(synth_out, sx_examples, sx_labels, sx_features, sx_multiclass, sx_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
