// SPDX-License-Identifier: Apache-2.0
//
// permgamp: permittivity estimation from path-loss data
// Copyright (C) 2026 The permgamp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "test_support.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using permgamp::testing::data_path;

namespace {

const fs::path& work_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "permgamp_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(const std::string& args) {
    const std::string cmd = std::string("\"") + PERMGAMP_CLI + "\" " + args + " 2>" +
                            (work_dir() / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

std::string path_arg(const fs::path& p) { return "\"" + p.string() + "\""; }

} // namespace

TEST_CASE("generate: default canyon matches the bundled fixture") {
    const auto out = work_dir() / "gen.json";
    REQUIRE(run("generate --seed 1 --out " + path_arg(out)) == 0);
    CHECK(slurp(out) == slurp(data_path("canyon.json")));
}

TEST_CASE("generate: knobs and rejected sizes") {
    const auto out = work_dir() / "gen1.json";
    REQUIRE(run("generate -M 3 -N 1 --true-eps 2,3,4 --out " + path_arg(out)) == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["materials"].size() == 3);
    CHECK(j["links"].size() == 1);
    CHECK(run("generate -M 0 --out " + path_arg(work_dir() / "bad.json")) == 2);
    CHECK(slurp(work_dir() / "stderr.txt").find("error") != std::string::npos);
}

TEST_CASE("estimate: missing scenario exits with an input error") {
    CHECK(run("estimate --scenario /nonexistent/s.json --sigma 0") == 2);
}

TEST_CASE("estimate: malformed dataset exits with an input error") {
    const auto bad = work_dir() / "bad_dataset.json";
    std::ofstream(bad) << R"({"measured_db": [1, 2], "noise_var": 0.1})";
    CHECK(run("estimate --scenario " + path_arg(data_path("canyon.json")) + " --dataset " + path_arg(bad)) == 2);
}

TEST_CASE("estimate: clean data recovers the truth, with oracle block") {
    const auto out = work_dir() / "report.json";
    const auto ds = work_dir() / "clean.json";
    REQUIRE(run("estimate --scenario " + path_arg(data_path("canyon.json")) +
                " --sigma 0 --seed 1 --no-timing --oracle --dataset-out " + path_arg(ds) + " --out " +
                path_arg(out)) == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["eps_hat"][0].get<double>() == doctest::Approx(4.0).epsilon(0.01));
    CHECK(j["eps_hat"][1].get<double>() == doctest::Approx(7.0).epsilon(0.01));
    CHECK(j["wall_ms"] == 0.0);
    CHECK(j["links_used"] == 100);
    CHECK(j["links_dropped"] == 0);
    CHECK(j["oracle"]["eps_map"][0] == doctest::Approx(4.0));
    CHECK(j["oracle"]["within_one_cell"] == true);

    // Re-running from the saved dataset gives the same bytes.
    const auto out2 = work_dir() / "report2.json";
    REQUIRE(run("estimate --scenario " + path_arg(data_path("canyon.json")) + " --dataset " + path_arg(ds) +
                " --no-timing --oracle --out " + path_arg(out2)) == 0);
    CHECK(slurp(out) == slurp(out2));
}

TEST_CASE("estimate: rays CSV is written") {
    const auto csv = work_dir() / "rays.csv";
    REQUIRE(run("estimate --scenario " + path_arg(data_path("canyon.json")) + " --sigma 1 --k-iter 2 --rays-csv " +
                path_arg(csv) + " --out " + path_arg(work_dir() / "r.json")) == 0);
    CHECK(slurp(csv).rfind("link,ray,", 0) == 0);
}

TEST_CASE("sweep: writes both CSV files") {
    const auto dir = work_dir() / "sweep";
    REQUIRE(run("sweep --scenario " + path_arg(data_path("canyon.json")) +
                " --sigmas 0.5,1 --seeds 2 --k-iter 3 --no-timing --out " + path_arg(dir)) == 0);
    const auto sweep = slurp(dir / "sweep.csv");
    CHECK(sweep.rfind("sigma_z,seed,material,", 0) == 0);
    CHECK(std::count(sweep.begin(), sweep.end(), '\n') == 1 + 2 * 2 * 2);
    const auto summary = slurp(dir / "summary.csv");
    CHECK(std::count(summary.begin(), summary.end(), '\n') == 1 + 2 * 2);
    CHECK(run("sweep --scenario " + path_arg(data_path("canyon.json")) + " --sigmas 1 --seeds 0 --out " +
              path_arg(dir)) == 2);
}

TEST_CASE("oracle: grid MAP JSON") {
    const auto out = work_dir() / "oracle.json";
    REQUIRE(run("oracle --scenario " + path_arg(data_path("canyon.json")) + " --sigma 0 --grid-step 0.5 --out " +
                path_arg(out)) == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["eps_map"][0] == doctest::Approx(4.0));
    CHECK(j["eps_map"][1] == doctest::Approx(7.0));
    CHECK(j["grid_nodes"] == 25 * 25);
}
