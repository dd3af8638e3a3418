#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "reference.hpp"
#include "sustain/error.hpp"
#include "sustain/evaluation.hpp"
#include "sustain/io.hpp"
#include "sustain/kernels.hpp"

using namespace sustain;
using namespace sustain::testing;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() /
                ("sustain_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                 ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    [[nodiscard]] const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

PlantedInstance small_instance(std::uint64_t seed) {
    PlantedSpec spec;
    spec.dims = {9, 7, 5};
    spec.rank = 3;
    spec.density = 0.2;
    spec.seed = seed;
    return generate_planted(spec);
}

} // namespace

TEST(ParseTensor, MatrixExample) {
    const auto t = io::parse_tensor("1 1 2\n2 2 5\n");
    EXPECT_EQ(t.dims(), (std::vector<std::size_t>{2, 2}));
    ASSERT_EQ(t.nnz(), 2u);
    EXPECT_EQ(t.value(0), 2.0);
    EXPECT_EQ(t.index(1)[0], 1u);
    EXPECT_EQ(t.index(1)[1], 1u);
    EXPECT_EQ(t.value(1), 5.0);
}

TEST(ParseTensor, DuplicatesAreSummed) {
    const auto t = io::parse_tensor("1 1 1\n1 1 2\n");
    ASSERT_EQ(t.nnz(), 1u);
    EXPECT_EQ(t.value(0), 3.0);
}

TEST(ParseTensor, CommentsAndDimsHeader) {
    const auto t = io::parse_tensor("# a comment\n# dims: 4 3 2\n\n  1 2 1   7\n2 1 2 0.5\n");
    EXPECT_EQ(t.dims(), (std::vector<std::size_t>{4, 3, 2}));
    EXPECT_EQ(t.nnz(), 2u);
    EXPECT_EQ(t.value(1), 0.5);
}

TEST(ParseTensor, Errors) {
    auto line_of = [](const std::string& text) -> std::size_t {
        try {
            io::parse_tensor(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    EXPECT_EQ(line_of("1 1 1\n2 x 1\n"), 2u);
    EXPECT_EQ(line_of("1 1 1\n1 1 1 1\n"), 2u);
    EXPECT_EQ(line_of("# c\n0 1 1\n"), 2u);
    EXPECT_EQ(line_of("1 -1 1\n"), 1u);
    EXPECT_EQ(line_of("1 1 inf\n"), 1u);
    EXPECT_EQ(line_of("1 1 nan\n"), 1u);
    EXPECT_EQ(line_of("1 1 -2\n"), 1u);
    EXPECT_EQ(line_of("# dims: 2 2\n3 1 1\n"), 2u);
    EXPECT_EQ(line_of("1 1\n"), 1u);
    EXPECT_THROW(io::parse_tensor(""), IoError);
    EXPECT_EQ(io::parse_tensor("# dims: 3 4\n").nnz(), 0u);
}

TEST(LoadTensor, MissingFile) {
    EXPECT_THROW(io::load_tensor("/nonexistent/x.tns"), IoError);
}

TEST(TensorRoundTrip, TextAndBinary) {
    TempDir dir;
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto t = random_real_tensor({6, 5, 4}, 30, s);
        io::save_tensor(dir.path() / "t.tns", t);
        EXPECT_EQ(io::load_tensor(dir.path() / "t.tns"), t);
        io::save_tensor(dir.path() / "t.bin", t, io::FileFormat::binary);
        EXPECT_EQ(io::load_tensor(dir.path() / "t.bin"), t);
    }
    // Trailing empty modes survive through the dims header.
    const auto sparse = SparseTensor::assemble({5, 5}, std::vector<Index>{0, 0}, std::vector<double>{1.0});
    io::save_tensor(dir.path() / "s.tns", sparse);
    EXPECT_EQ(io::load_tensor(dir.path() / "s.tns").dims(), sparse.dims());
}

TEST(TensorBinary, TruncatedFileRejected) {
    TempDir dir;
    const auto t = random_real_tensor({4, 4}, 8, 1);
    io::save_tensor(dir.path() / "t.bin", t, io::FileFormat::binary);
    auto bytes = io::read_text_file(dir.path() / "t.bin");
    bytes.resize(bytes.size() - 3);
    io::write_text_file(dir.path() / "cut.bin", bytes);
    EXPECT_THROW(io::load_tensor(dir.path() / "cut.bin"), IoError);
}

TEST(ModelRoundTrip, TextAndBinary) {
    TempDir dir;
    const auto inst = small_instance(3);
    const double f = fit(inst.tensor, inst.truth);
    io::save_model(dir.path() / "text", inst.truth, 17, f);
    const auto loaded = io::load_model(dir.path() / "text");
    EXPECT_EQ(loaded.model, inst.truth);
    EXPECT_EQ(loaded.metadata.tau, inst.truth.tau);
    EXPECT_EQ(loaded.metadata.seed, std::optional<std::uint64_t>(17));
    ASSERT_TRUE(loaded.metadata.fit.has_value());
    EXPECT_NEAR(*loaded.metadata.fit, fit(inst.tensor, loaded.model), 1e-10);

    io::save_model(dir.path() / "bin", inst.truth, std::nullopt, f, io::FileFormat::binary);
    const auto lb = io::load_model(dir.path() / "bin");
    EXPECT_EQ(lb.model, inst.truth);
    EXPECT_FALSE(lb.metadata.seed.has_value());
    EXPECT_EQ(lb.metadata.fit, std::optional<double>(f));
}

TEST(ModelFiles, HeaderMismatchAndInvalidValuesRejected) {
    TempDir dir;
    const auto inst = small_instance(4);
    io::save_model(dir.path(), inst.truth, 1, std::nullopt);
    {
        std::ofstream meta(dir.path() / "model.meta", std::ios::app);
        meta << "tau=4\n";
    }
    EXPECT_THROW(io::load_model(dir.path()), IoError);

    io::save_model(dir.path(), inst.truth, 1, std::nullopt);
    io::write_text_file(dir.path() / "lambda.txt", "0\n1\n1\n");
    EXPECT_THROW(io::load_model(dir.path()), IoError);

    io::save_model(dir.path(), inst.truth, 1, std::nullopt);
    io::write_text_file(dir.path() / "factor_1.txt", "1 1 1\n");
    EXPECT_THROW(io::load_model(dir.path()), IoError);

    EXPECT_THROW(io::load_model(dir.path() / "missing"), IoError);
}

TEST(ModelFiles, MetadataHasKeyValueHeader) {
    TempDir dir;
    const auto inst = small_instance(5);
    io::save_model(dir.path(), inst.truth, 8, 0.5);
    const auto meta = io::read_text_file(dir.path() / "model.meta");
    EXPECT_NE(meta.find("format_version=1\n"), std::string::npos);
    EXPECT_NE(meta.find("dims=9,7,5\n"), std::string::npos);
    EXPECT_NE(meta.find("rank=3\n"), std::string::npos);
    EXPECT_NE(meta.find("tau=5\n"), std::string::npos);
    EXPECT_NE(meta.find("seed=8\n"), std::string::npos);
    EXPECT_NE(meta.find("fit=0.5\n"), std::string::npos);
}

TEST(TraceCsv, FixedColumns) {
    SolverTrace trace;
    trace.objective = {10.0, 4.5};
    trace.fit = {0.0, 0.55};
    trace.seconds = {0.0, 0.25};
    trace.zero_lock_repairs = {0, 2};
    EXPECT_EQ(io::format_trace_csv(trace), "sweep,objective,fit,seconds,zero_lock_repairs\n0,10,0,0,0\n1,4.5,0.55,0.25,2\n");
}

TEST(StabilityJson, ContainsPairsAndSelection) {
    StabilityReport rep;
    rep.repetitions = 3;
    rep.selected_rank = 2;
    RankStability r;
    r.rank = 2;
    r.score = 0.1;
    r.pairs = {{0, 1, 0.1}, {0, 2, 0.2}, {1, 2, 0.0}};
    r.runs = {{2, 0, 1, 0.9, false}, {2, 1, 2, 0.8, false}, {2, 2, 3, 0.7, false}};
    rep.per_rank.push_back(r);
    RankStability empty;
    empty.rank = 3;
    empty.score = NAN;
    rep.per_rank.push_back(empty);
    const auto j = nlohmann::json::parse(io::stability_report_json(rep));
    EXPECT_EQ(j["selected_rank"], 2);
    EXPECT_EQ(j["ranks"][0]["pairs"].size(), 3u);
    EXPECT_TRUE(j["ranks"][1]["score"].is_null());
}

TEST(ScoreTable, SortedByScoreWithNames) {
    IntegerFactorModel m;
    m.lambda = {2};
    m.factors = {DenseMatrix(4, 1, std::vector<double>{1, 0, 1, 0}), DenseMatrix(3, 1, std::vector<double>{2, 0, 5})};
    const auto table = io::format_score_table(m, 1, {"alpha", "beta", ""});
    const auto first = table.find("feature_3");
    const auto second = table.find("alpha");
    EXPECT_NE(table.find("prevalence=50.0%"), std::string::npos);
    ASSERT_NE(first, std::string::npos);
    ASSERT_NE(second, std::string::npos);
    EXPECT_LT(first, second);
    EXPECT_EQ(table.find("beta"), std::string::npos);
    EXPECT_THROW(io::format_score_table(m, 2, {}), DimensionError);
}

TEST(Manifest, RoundTripAndValidation) {
    TempDir dir;
    const auto input = dir.path() / "x.tns";
    io::write_text_file(input, "1 1 1\n");
    io::RunManifest m{io::kFormatVersion, "factor-m", input.string(), "out", {"--rank", "2"}};
    io::write_manifest(dir.path() / "m.json", m);
    const auto back = io::read_manifest(dir.path() / "m.json");
    EXPECT_EQ(back.command, "factor-m");
    EXPECT_EQ(back.arguments, m.arguments);

    m.format_version = 99;
    io::write_manifest(dir.path() / "bad.json", m);
    EXPECT_THROW(io::read_manifest(dir.path() / "bad.json"), IoError);

    m.format_version = io::kFormatVersion;
    m.input = (dir.path() / "gone.tns").string();
    io::write_manifest(dir.path() / "gone.json", m);
    EXPECT_THROW(io::read_manifest(dir.path() / "gone.json"), IoError);
}
