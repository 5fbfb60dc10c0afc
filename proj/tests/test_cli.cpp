#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "g2g/checkpoint.hpp"
#include "g2g/cli.hpp"
#include "g2g/evaluation.hpp"

using namespace g2g;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path dir;
    TempDir() {
        dir = fs::temp_directory_path() / fs::path("g2g_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir);
    }
    ~TempDir() { fs::remove_all(dir); }
    std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// One shared synthetic dataset for the CLI round-trips.
struct Fixture {
    TempDir tmp;
    std::string prefix;
    Fixture() {
        prefix = tmp / "sbm";
        const int rc = run_cli({"synth", "--n", "60", "--blocks", "3", "--p-in", "0.35",
                                "--p-out", "0.03", "--attr-dim", "8", "--attr-noise", "0.15",
                                "--seed", "5", "--out-prefix", prefix});
        REQUIRE(rc == 0);
    }
};

} // namespace

TEST_CASE("synth writes loadable edge/attr/label files") {
    Fixture fx;
    AttributedGraph g = load_edge_list(fx.prefix + ".edges.tsv", false);
    CHECK(g.num_nodes == 60);
    load_attributes(fx.prefix + ".attrs.tsv", g);
    CHECK(g.attributes.cols() == 8);
    load_labels(fx.prefix + ".labels.tsv", g);
    CHECK(g.num_classes == 3);

    SUBCASE("synth is deterministic per seed") {
        std::string other = fx.tmp / "again";
        REQUIRE(run_cli({"synth", "--n", "60", "--blocks", "3", "--p-in", "0.35", "--p-out",
                         "0.03", "--attr-dim", "8", "--attr-noise", "0.15", "--seed", "5",
                         "--out-prefix", other}) == 0);
        CHECK(read_file(other + ".edges.tsv") == read_file(fx.prefix + ".edges.tsv"));
        CHECK(read_file(other + ".attrs.tsv") == read_file(fx.prefix + ".attrs.tsv"));
    }
    SUBCASE("p_out = 0 yields no inter-block edges") {
        std::string pure = fx.tmp / "pure";
        REQUIRE(run_cli({"synth", "--n", "30", "--blocks", "3", "--p-in", "0.5", "--p-out", "0",
                         "--attr-dim", "4", "--seed", "2", "--out-prefix", pure}) == 0);
        AttributedGraph h = load_edge_list(pure + ".edges.tsv", false);
        load_labels(pure + ".labels.tsv", h);
        for (const auto& [u, v] : h.edge_list()) CHECK(h.labels[u] == h.labels[v]);
    }
}

TEST_CASE("usage errors exit with code 1") {
    CHECK(run_cli({"train", "--out", "/tmp/x.g2gm"}) == 1);        // missing --graph
    CHECK(run_cli({"nonsense"}) == 1);                             // unknown subcommand
    CHECK(run_cli({}) == 1);                                       // missing subcommand
    Fixture fx;
    // conflicting feature flags
    CHECK(run_cli({"train", "--graph", fx.prefix + ".edges.tsv", "--attrs",
                   fx.prefix + ".attrs.tsv", "--one-hot", "--out", fx.tmp / "m.g2gm"}) == 1);
    // odd --dim
    CHECK(run_cli({"train", "--graph", fx.prefix + ".edges.tsv", "--attrs",
                   fx.prefix + ".attrs.tsv", "--dim", "7", "--epochs", "1", "--out",
                   fx.tmp / "m.g2gm"}) == 1);
}

TEST_CASE("data errors exit with code 2") {
    CHECK(run_cli({"train", "--graph", "/nonexistent/edges.tsv", "--one-hot", "--out",
                   "/tmp/x.g2gm"}) == 2);
    CHECK(run_cli({"embed", "--model", "/nonexistent/m.g2gm", "--attrs", "/nonexistent/a.tsv",
                   "--out", "/tmp/e.tsv"}) == 2);
}

TEST_CASE("train/embed/eval round trip") {
    Fixture fx;
    const std::string model = fx.tmp / "model.g2gm";
    const int rc = run_cli({"train", "--graph", fx.prefix + ".edges.tsv", "--attrs",
                            fx.prefix + ".attrs.tsv", "--labels", fx.prefix + ".labels.tsv",
                            "--dim", "8", "--k", "2", "--hidden", "16", "--epochs", "40",
                            "--val-frac", "0.1", "--test-frac", "0.15", "--seed", "9", "--quiet",
                            "--out", model});
    REQUIRE(rc == 0);
    CHECK(fs::exists(model));
    CHECK(fs::exists(model + ".trace.json"));
    CHECK(fs::exists(model + ".split.json"));

    SUBCASE("embed reproduces training-time embeddings bit for bit") {
        const std::string out = fx.tmp / "emb.tsv";
        REQUIRE(run_cli({"embed", "--model", model, "--attrs", fx.prefix + ".attrs.tsv", "--out",
                         out}) == 0);
        EncoderParameters params = load_model(model);
        AttributeMatrix attrs = load_attribute_file(fx.prefix + ".attrs.tsv");
        auto expected = forward_batch(params, attrs);

        std::ifstream in(out);
        std::string line;
        int node = 0;
        while (std::getline(in, line)) {
            std::istringstream fields(line);
            int id;
            fields >> id;
            CHECK(id == node);
            for (int d = 0; d < 4; ++d) {
                double mu;
                fields >> mu;
                CHECK(mu == expected[node].mu[d]); // 17 significant digits round-trip
            }
            for (int d = 0; d < 4; ++d) {
                double var;
                fields >> var;
                CHECK(var == expected[node].var[d]);
            }
            ++node;
        }
        CHECK(node == 60);
    }

    SUBCASE("embed rejects mismatched attribute width") {
        std::string narrow = fx.tmp / "narrow.tsv";
        std::ofstream bad(narrow);
        bad << "%%g2g-attrs 3 2\n0\t0\t1.0\n";
        bad.close();
        CHECK(run_cli({"embed", "--model", model, "--attrs", narrow, "--out", fx.tmp / "x.tsv"}) ==
              2);
    }

    SUBCASE("link protocol reproduces the recorded best validation AUC") {
        const std::string report_path = fx.tmp / "link.json";
        REQUIRE(run_cli({"eval", "--protocol", "link", "--graph", fx.prefix + ".edges.tsv",
                         "--attrs", fx.prefix + ".attrs.tsv", "--model", model,
                         "--split-manifest", model + ".split.json", "--which", "val", "--out",
                         report_path}) == 0);
        auto report = nlohmann::json::parse(read_file(report_path));
        TrainingTrace trace = load_trace(model + ".trace.json");
        CHECK(report["metrics"]["auc"].get<double>() ==
              doctest::Approx(trace.best_val_auc).epsilon(1e-12));
    }

    SUBCASE("classify protocol needs labels") {
        CHECK(run_cli({"eval", "--protocol", "classify", "--graph", fx.prefix + ".edges.tsv",
                       "--attrs", fx.prefix + ".attrs.tsv", "--model", model, "--fractions",
                       "0.3", "--trials", "2"}) == 2);
    }

    SUBCASE("uncertainty protocol rejects a short trace") {
        CHECK(run_cli({"eval", "--protocol", "uncertainty", "--graph", fx.prefix + ".edges.tsv",
                       "--attrs", fx.prefix + ".attrs.tsv", "--labels", fx.prefix + ".labels.tsv",
                       "--model", model, "--trace", model + ".trace.json", "--window", "200"}) ==
              2);
    }
}

TEST_CASE("identical train invocations are bit-identical (checkpoint and trace)") {
    Fixture fx;
    auto invoke = [&](const std::string& out) {
        return run_cli({"train", "--graph", fx.prefix + ".edges.tsv", "--attrs",
                        fx.prefix + ".attrs.tsv", "--dim", "8", "--hidden", "12", "--epochs",
                        "25", "--val-frac", "0.1", "--test-frac", "0.1", "--seed", "31",
                        "--quiet", "--out", out});
    };
    const std::string a = fx.tmp / "runA.g2gm";
    const std::string b = fx.tmp / "runB.g2gm";
    REQUIRE(invoke(a) == 0);
    REQUIRE(invoke(b) == 0);
    CHECK(read_file(a) == read_file(b));
    CHECK(read_file(a + ".trace.json") == read_file(b + ".trace.json"));
    CHECK(read_file(a + ".split.json") == read_file(b + ".split.json"));
}

TEST_CASE("epochs 0 still writes a valid checkpoint of the initialization") {
    Fixture fx;
    const std::string model = fx.tmp / "init.g2gm";
    REQUIRE(run_cli({"train", "--graph", fx.prefix + ".edges.tsv", "--one-hot", "--dim", "8",
                     "--epochs", "0", "--val-frac", "0", "--test-frac", "0", "--seed", "3",
                     "--quiet", "--out", model}) == 0);
    EncoderParameters params = load_model(model);
    CHECK(params.input_dim == 60);
    CHECK(params.half_dim() == 4);
}

TEST_CASE("split manifests round-trip through JSON") {
    Fixture fx;
    AttributedGraph g = load_edge_list(fx.prefix + ".edges.tsv", false);
    DataSplit split = split_edges(g, 0.1, 0.2, true, 77);
    const std::string path = fx.tmp / "split.json";
    save_split_manifest(split, path, {{"seed", 77}});
    nlohmann::json extra;
    DataSplit loaded = load_split_manifest(path, &extra);
    CHECK(loaded.train_edges == split.train_edges);
    CHECK(loaded.val_edges == split.val_edges);
    CHECK(loaded.test_edges == split.test_edges);
    CHECK(loaded.val_non_edges == split.val_non_edges);
    CHECK(loaded.test_non_edges == split.test_non_edges);
    CHECK(extra["seed"] == 77);
}
