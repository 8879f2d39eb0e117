#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "tps/errors.hpp"
#include "tps/io.hpp"

namespace fs = std::filesystem;
using namespace tps;

namespace {

std::string temp_file(const std::string& name, const std::string& content) {
    const std::string path = (fs::temp_directory_path() / name).string();
    std::ofstream(path) << content;
    return path;
}

}  // namespace

TEST_CASE("csv round trip preserves doubles exactly") {
    Eigen::MatrixXd m(3, 2);
    m << 0.1, 1.0 / 3.0, -1e-17, 12345.678901234567, 2.0, 0.0;
    const std::string path = (fs::temp_directory_path() / "tps_roundtrip.csv").string();
    write_csv(path, {"a", "b"}, m);
    const CsvTable t = read_csv(path);
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    CHECK((t.values - m).cwiseAbs().maxCoeff() == 0.0);
    fs::remove(path);
}

TEST_CASE("csv reader reports row and column diagnostics") {
    const std::string ragged = temp_file("tps_ragged.csv", "x,y\n1,2\n3\n");
    CHECK_THROWS_WITH_AS(static_cast<void>(read_csv(ragged)),
                         doctest::Contains(":3"), SchemaError);
    const std::string text = temp_file("tps_text.csv", "x,y\n1,apple\n");
    CHECK_THROWS_WITH_AS(static_cast<void>(read_csv(text)), doctest::Contains("'y'"),
                         SchemaError);
    const std::string empty = temp_file("tps_empty.csv", "");
    CHECK_THROWS_AS(static_cast<void>(read_csv(empty)), SchemaError);
    CHECK_THROWS_AS(static_cast<void>(read_csv("/nonexistent/file.csv")), SchemaError);
    fs::remove(ragged);
    fs::remove(text);
    fs::remove(empty);
}

TEST_CASE("manifest parsing and validation") {
    const std::string good =
        temp_file("tps_manifest.json", R"({"x_block": ["a", "b"], "z_block": ["c"]})");
    const BlockManifest m = read_manifest(good);
    CHECK(m.x_block == std::vector<std::string>{"a", "b"});
    CHECK(m.z_block == std::vector<std::string>{"c"});

    const std::string missing = temp_file("tps_manifest_bad.json", R"({"z_block": []})");
    CHECK_THROWS_AS(static_cast<void>(read_manifest(missing)), SchemaError);
    const std::string unknown =
        temp_file("tps_manifest_unknown.json", R"({"x_block": ["a"], "w_block": ["b"]})");
    CHECK_THROWS_AS(static_cast<void>(read_manifest(unknown)), SchemaError);
    fs::remove(good);
    fs::remove(missing);
    fs::remove(unknown);
}
