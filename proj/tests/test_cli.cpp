// End-to-end checks of the command line interface; each case shells out to
// the built binary.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pigan/dataset.hpp"
#include "pigan/glyphs.hpp"

using namespace pigan;
namespace fs = std::filesystem;

namespace {

const std::string kCli = PIGAN_CLI_PATH;

fs::path work_dir() {
    const fs::path dir = fs::temp_directory_path() / "pigan_cli_test";
    fs::create_directories(dir);
    return dir;
}

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_ring_config(const fs::path& path, const fs::path& out_dir, int iterations) {
    std::ofstream cfg(path);
    cfg << R"({
  "format_version": 1,
  "gan": {"pi": 0.5, "batch_size": 32, "latent_dim": 4, "iterations": )"
        << iterations << R"(, "seed": 11},
  "model": {"preset": "mlp2d", "hidden": 16},
  "data": {"kind": "mixture", "mixture": {"kind": "ring"}},
  "out_dir": ")" << out_dir.string() << R"(",
  "checkpoint_every": 100,
  "grid_every": 100
})";
}

}  // namespace

TEST_CASE("train writes the run directory and is byte-deterministic") {
    const fs::path dir = work_dir();
    const fs::path cfg = dir / "ring.json";
    write_ring_config(cfg, dir / "runA", 8);
    REQUIRE(run("train --config " + cfg.string()) == 0);
    CHECK(fs::exists(dir / "runA" / "config.json"));
    CHECK(fs::exists(dir / "runA" / "losses.csv"));
    CHECK(fs::exists(dir / "runA" / "ckpt_final.pigan"));
    CHECK(fs::exists(dir / "runA" / "samples_final.pgm"));

    REQUIRE(run("train --config " + cfg.string() + " --out " + (dir / "runB").string()) == 0);
    CHECK(slurp(dir / "runA" / "losses.csv") == slurp(dir / "runB" / "losses.csv"));

    // a different seed must change the series
    REQUIRE(run("train --config " + cfg.string() + " --seed 12 --out " + (dir / "runC").string()) ==
            0);
    CHECK(slurp(dir / "runA" / "losses.csv") != slurp(dir / "runC" / "losses.csv"));
}

TEST_CASE("train with zero iterations writes snapshot and checkpoint only") {
    const fs::path dir = work_dir();
    const fs::path cfg = dir / "ring0.json";
    write_ring_config(cfg, dir / "run0", 8);
    REQUIRE(run("train --config " + cfg.string() + " --iters 0") == 0);
    CHECK(fs::exists(dir / "run0" / "config.json"));
    CHECK(fs::exists(dir / "run0" / "ckpt_final.pigan"));
    const std::string losses = slurp(dir / "run0" / "losses.csv");
    CHECK(losses == "iteration,j_d,j_g\n");
}

TEST_CASE("invalid config yields a schema diagnostic and non-zero exit") {
    const fs::path dir = work_dir();
    const fs::path cfg = dir / "bad.json";
    std::ofstream(cfg) << R"({"format_version": 1, "gan": {"pi": 0.5, "unknown_key": 3},
        "model": {"preset": "mlp2d"}, "data": {"kind": "mixture",
        "mixture": {"kind": "ring"}}, "out_dir": "x"})";
    CHECK(run("train --config " + cfg.string()) != 0);
}

TEST_CASE("divergence subcommand tabulates the identity") {
    const fs::path dir = work_dir();
    const fs::path spec = dir / "div.json";
    std::ofstream(spec) << R"({"mode": "exact", "p": [0.7, 0.3], "q": [0.2, 0.8]})";
    const fs::path out = dir / "div.csv";
    REQUIRE(run("divergence --spec " + spec.string() + " --pis 0.1,0.5,0.9 --out " +
                out.string()) == 0);
    std::ifstream csv(out);
    std::string header;
    std::getline(csv, header);
    CHECK(header == "pi,kl_pq,kl_qp,js_pi,constant,c_g,identity_residual");
    std::string line;
    int rows = 0;
    while (std::getline(csv, line)) {
        ++rows;
        const auto last_comma = line.rfind(',');
        const double residual = std::stod(line.substr(last_comma + 1));
        CHECK(residual < 1e-10);
    }
    CHECK(rows == 3);
}

TEST_CASE("divergence with identical distributions gives zero js") {
    const fs::path dir = work_dir();
    const fs::path spec = dir / "div_eq.json";
    std::ofstream(spec) << R"({"mode": "exact", "p": [0.5, 0.5], "q": [0.5, 0.5]})";
    const fs::path out = dir / "div_eq.csv";
    REQUIRE(run("divergence --spec " + spec.string() + " --pis 0.5 --out " + out.string()) == 0);
    std::ifstream csv(out);
    std::string header, row;
    std::getline(csv, header);
    std::getline(csv, row);
    // pi,kl_pq,kl_qp,js,constant,c_g,residual
    std::vector<double> vals;
    std::stringstream ss(row);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    REQUIRE(vals.size() == 7);
    CHECK(vals[3] == doctest::Approx(0.0));                  // js
    CHECK(vals[5] == doctest::Approx(-std::log(2.0)));       // c_g
    CHECK(vals[4] == doctest::Approx(vals[5]));              // constant equals c_g when p=q
}

TEST_CASE("data pipeline: make-glyphs, info, and training compatibility") {
    const fs::path dir = work_dir();
    const fs::path spec = dir / "glyphs.json";
    std::ofstream(spec) << R"({"background_classes": 4, "evaluation_classes": 2,
        "examples_per_class": 3, "seed": 5})";
    REQUIRE(run("data make-glyphs --spec " + spec.string() + " --out " +
                (dir / "tiny").string()) == 0);
    const fs::path bg = dir / "tiny_background.pigands";
    REQUIRE(fs::exists(bg));
    REQUIRE(fs::exists(dir / "tiny_evaluation.pigands"));
    const LabeledDataset ds = load_dataset(bg.string());
    CHECK(ds.count() == 12);
    CHECK(ds.class_count() == 4);
    CHECK(ds.split == Split::Background);
    CHECK(run("data info --file " + bg.string()) == 0);
}

TEST_CASE("data make-mixture produces a loadable 2D dataset") {
    const fs::path dir = work_dir();
    const fs::path out = dir / "ring.pigands";
    REQUIRE(run("data make-mixture --count 500 --seed 3 --out " + out.string()) == 0);
    const LabeledDataset ds = load_dataset(out.string());
    CHECK(ds.count() == 500);
    CHECK(ds.samples.rank() == 2);
    CHECK(ds.class_count() == 8);  // ring component ids as labels
}

TEST_CASE("ingest-pgm on an empty directory fails cleanly") {
    const fs::path dir = work_dir() / "empty_ingest";
    fs::create_directories(dir);
    CHECK(run("data ingest-pgm --dir " + dir.string() + " --out " +
              (work_dir() / "none.pigands").string()) != 0);
}

TEST_CASE("conv training, eval tasks and interpolation" * doctest::timeout(900)) {
    const fs::path dir = work_dir();

    // tiny glyph corpus
    const fs::path gspec = dir / "glyphs_small.json";
    std::ofstream(gspec) << R"({"background_classes": 4, "evaluation_classes": 3,
        "examples_per_class": 4, "seed": 5})";
    REQUIRE(run("data make-glyphs --spec " + gspec.string() + " --out " +
                (dir / "corpus").string()) == 0);

    // short conv run on the background split
    const fs::path cfg = dir / "conv.json";
    std::ofstream(cfg) << R"({
  "format_version": 1,
  "gan": {"pi": 0.5, "batch_size": 16, "latent_dim": 8, "iterations": 3, "seed": 2},
  "model": {"preset": "conv16"},
  "data": {"kind": "dataset", "path": ")"
                       << (dir / "corpus_background.pigands").string() << R"("},
  "out_dir": ")" << (dir / "conv_run").string() << R"(",
  "checkpoint_every": 0,
  "grid_every": 0
})";
    REQUIRE(run("train --config " + cfg.string()) == 0);
    const std::string ckpt = (dir / "conv_run" / "ckpt_final.pigan").string();
    REQUIRE(fs::exists(ckpt));

    const std::string eval_ds = (dir / "corpus_evaluation.pigands").string();
    SUBCASE("retrieval") {
        REQUIRE(run("eval --checkpoint " + ckpt + " --task retrieval --dataset " + eval_ds +
                    " --topk 3 --mosaic-queries 2 --out " + (dir / "eval_ret").string()) == 0);
        CHECK(fs::exists(dir / "eval_ret" / "retrieval.csv"));
        CHECK(fs::exists(dir / "eval_ret" / "retrieval_q0000.pgm"));
    }
    SUBCASE("oneshot") {
        REQUIRE(run("eval --checkpoint " + ckpt + " --task oneshot --dataset " + eval_ds +
                    " --out " + (dir / "eval_os").string()) == 0);
        const std::string csv = slurp(dir / "eval_os" / "oneshot.csv");
        CHECK(csv.find("method,accuracy") == 0);
        CHECK(csv.find("1nn,") != std::string::npos);
        CHECK(csv.find("linear_svm,") != std::string::npos);
    }
    SUBCASE("overfit") {
        REQUIRE(run("eval --checkpoint " + ckpt + " --task overfit --dataset " + eval_ds +
                    " --samples 4 --out " + (dir / "eval_of").string()) == 0);
        CHECK(fs::exists(dir / "eval_of" / "overfit.csv"));
        CHECK(fs::exists(dir / "eval_of" / "overfit_pairs.pgm"));
    }
    SUBCASE("interpolation strips") {
        REQUIRE(run("interp --checkpoint " + ckpt + " --mode lerp --steps 9 --seed 4 --out " +
                    (dir / "lerp.pgm").string()) == 0);
        REQUIRE(run("interp --checkpoint " + ckpt + " --mode slerp --steps 9 --seed 4 --out " +
                    (dir / "slerp.pgm").string()) == 0);
        CHECK(fs::exists(dir / "lerp.pgm"));
        CHECK(fs::exists(dir / "slerp.pgm"));
        CHECK(run("interp --checkpoint " + ckpt + " --steps 1 --out " +
                  (dir / "bad.pgm").string()) != 0);
    }
    SUBCASE("retrieval on a 2D checkpoint is rejected with a shape message") {
        const fs::path rcfg = dir / "ring_for_eval.json";
        write_ring_config(rcfg, dir / "ring_run", 2);
        REQUIRE(run("train --config " + rcfg.string()) == 0);
        CHECK(run("eval --checkpoint " + (dir / "ring_run" / "ckpt_final.pigan").string() +
                  " --task retrieval --dataset " + eval_ds) != 0);
    }
}

TEST_CASE("modes task on a short ring run") {
    const fs::path dir = work_dir();
    const fs::path cfg = dir / "ring_modes.json";
    write_ring_config(cfg, dir / "modes_run", 5);
    REQUIRE(run("train --config " + cfg.string()) == 0);
    const fs::path mix = dir / "ring_mix.json";
    std::ofstream(mix) << R"({"kind": "ring"})";
    REQUIRE(run("eval --checkpoint " + (dir / "modes_run" / "ckpt_final.pigan").string() +
                " --task modes --mixture " + mix.string() + " --samples 2000 --out " +
                (dir / "eval_modes").string()) == 0);
    const std::string csv = slurp(dir / "eval_modes" / "modes.csv");
    CHECK(csv.find("pi,kl_pq,kl_qp,modes_covered,hq_fraction") == 0);
}

TEST_CASE("gradcheck subcommand passes") {
    CHECK(run("gradcheck --max-params 400") == 0);
}
