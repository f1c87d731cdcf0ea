#include <catch_amalgamated.hpp>

#include <filesystem>
#include <regex>

#include "inflatelab/io.hpp"

using namespace inflatelab;
using Catch::Matchers::ContainsSubstring;

namespace {

std::size_t count_matches(const std::string& text, const std::string& pattern) {
    const std::regex re(pattern);
    return static_cast<std::size_t>(std::distance(std::sregex_iterator(text.begin(), text.end(), re), std::sregex_iterator()));
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "inflatelab_test_io";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("config parsing", "[io][config]") {
    SECTION("minimal config gets the defaults") {
        const auto cfg = parse_config_text(R"({"experiment": "nonendpoint"})");
        CHECK(cfg.s == -0.8);
        CHECK(cfg.eps == 0.01);
        CHECK(cfg.delta == 0.1);
        CHECK(cfg.N_list.size() == 9);
        CHECK(cfg.N_list.front() == 64);
        CHECK(cfg.N_list.back() == 16384);
        CHECK(cfg.effective_equation() == "nlh");
        CHECK(cfg.J_max == 4);
        CHECK(cfg.C0 == 6.75);
    }
    SECTION("endpoint defaults") {
        const auto cfg = parse_config_text(R"({"experiment": "endpoint"})");
        CHECK(cfg.K_list == std::vector<int>{2, 3, 4});
        CHECK(cfg.N_list == std::vector<std::int64_t>{256});
    }
    SECTION("variants pick their equation") {
        CHECK(parse_config_text(R"({"experiment": "ch-var2"})").effective_equation() == "ch-var2");
        CHECK(parse_config_text(R"({"experiment": "nonendpoint", "equation": "nlh-focusing"})").effective_equation() ==
              "nlh-focusing");
    }
    SECTION("window violation") {
        CHECK_THROWS_WITH(parse_config_text(R"({"experiment": "nonendpoint", "s": -0.5, "delta": 0.1, "eps": 0.01})"),
                          ContainsSubstring("s < -2/3 - eps"));
    }
    SECTION("schema errors name the key path") {
        CHECK_THROWS_WITH(parse_config_text(R"({"experiment": "nonendpoint", "s": -0.8, "s": -0.75})"),
                          ContainsSubstring("duplicate key 's'"));
        CHECK_THROWS_WITH(parse_config_text(R"({"experiment": "nonendpoint", "N_list": [64, "x"]})"),
                          ContainsSubstring("/N_list/1"));
        CHECK_THROWS_WITH(parse_config_text(R"({"experiment": "nonendpoint", "sigma": 1})"), ContainsSubstring("/sigma"));
        CHECK_THROWS_AS(parse_config_text(R"({"experiment": "nonendpoint", "J_max": 1.5})"), ConfigError);
        CHECK_THROWS_AS(parse_config_text(R"({"experiment": "nonendpoint", "C0": 0})"), ConfigError);
        CHECK_THROWS_AS(parse_config_text(R"({"experiment": "nonendpoint", "J_max": 9})"), ConfigError);
        CHECK_THROWS_AS(parse_config_text(R"({"experiment": "heat"})"), ConfigError);
        CHECK_THROWS_AS(parse_config_text("[1, 2]"), ConfigError);
        CHECK_THROWS_AS(parse_config_text("{"), ConfigError);
        CHECK_THROWS_AS(parse_config("/nonexistent/inflatelab.json"), ConfigError);
    }
    SECTION("echo round trip") {
        auto cfg = parse_config_text(R"({"experiment": "endpoint", "K_list": [3, 2]})");
        const auto echo = config_to_json(cfg);
        const auto again = parse_config_json(echo);
        CHECK(config_to_json(again) == echo);
        CHECK(config_echo_path("out/results.csv") == std::filesystem::path("out/results.config.json"));
    }
}

TEST_CASE("data specs", "[io][data]") {
    const auto a = parse_data_spec("nonendpoint:N=4,s=-0.8,eps=0.05");
    CHECK(a == make_data_nonendpoint({4, -0.8, 0.05, 0.1, 1, 1.0}));
    const auto b = parse_data_spec("endpoint:N=8,K=2");
    CHECK(b.support_size() == 8);
    const auto c = parse_data_spec("cos:0.5@1+0.25@2");
    CHECK(c == TrigPolynomial::cosine({1}, 0.5) + TrigPolynomial::cosine({2}, 0.25));
    const auto d = parse_data_spec("cos:1@1,0+1@0,1");
    CHECK(d.dimension() == 2);
    const auto path = scratch("field.txt");
    write_text(path, serialize_field(c));
    CHECK(parse_data_spec("file:" + path.string()) == c);
    CHECK_THROWS_AS(parse_data_spec("nonendpoint:N=4,s=-0.5"), ConfigError);
    CHECK_THROWS_AS(parse_data_spec("nonendpoint:N=4,q=1"), ConfigError);
    CHECK_THROWS_AS(parse_data_spec("cos:1@1+1@1,1"), ConfigError);
    CHECK_THROWS_AS(parse_data_spec("gauss:1"), ConfigError);
    CHECK_THROWS_AS(parse_data_spec("4"), ConfigError);
    CHECK_THROWS_AS(parse_data_spec("endpoint:N=256,K=6"), ResourceError);
}

TEST_CASE("CSV output", "[io][csv]") {
    CHECK(records_to_csv({}) == std::string(kCsvHeader) + "\n");
    CHECK(format_g15(0.1) == "0.1");
    CHECK(format_g15(1.0 / 3.0) == "0.333333333333333");
    CHECK(format_g15(-kInfinity) == "-inf");

    ScanConfig cfg;
    cfg.N_list = {64, 128, 256};
    cfg.timing = false;
    const auto records = run_inflation_scan(cfg);
    const auto text = records_to_csv(records);
    CHECK(text == records_to_csv(run_inflation_scan(cfg)));

    const auto back = records_from_csv(text);
    REQUIRE(back.size() == records.size());
    CHECK(records_to_csv(back) == text);
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].N == records[i].N);
        CHECK(std::abs(back[i].p0_xi1_pipeline - records[i].p0_xi1_pipeline) <= 1e-14 * records[i].p0_xi1_pipeline);
        CHECK(std::abs(back[i].norm_u0_Cs - records[i].norm_u0_Cs) <= 1e-14 * records[i].norm_u0_Cs);
    }
    CHECK_THROWS_AS(records_from_csv("N,K\n"), ParseError);
    CHECK_THROWS_AS(records_from_csv(std::string(kCsvHeader) + "\nnlh,64\n"), ParseError);
}

TEST_CASE("failed and closed-form-only points", "[io][csv]") {
    InflationRecord bad;
    bad.equation = "nlh";
    bad.N = 64;
    bad.t = 0.5;
    bad.error = "boom";
    CHECK_THAT(csv_row(bad), ContainsSubstring(",nan,nan,nan,nan,nan,nan,"));
    CHECK(record_to_json(bad)["error"] == "boom");

    ScanConfig cfg;
    cfg.experiment = "endpoint";
    cfg.K_list = {6};
    cfg.timing = false;
    const auto r = run_inflation_scan(cfg);
    CHECK(record_to_json(r[0])["closed_form_only"] == true);
    CHECK_THAT(csv_row(r[0]), ContainsSubstring(",nan,"));
}

TEST_CASE("JSONL output", "[io][jsonl]") {
    ScanConfig cfg;
    cfg.N_list = {64, 128};
    cfg.timing = false;
    const auto text = records_to_jsonl(run_inflation_scan(cfg));
    std::istringstream in(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        const auto j = Json::parse(line);
        CHECK(j["equation"] == "nlh");
        CHECK(j.contains("p0_xi1_signed"));
        CHECK(j["tail_bound"] == "inf");
        ++n;
    }
    CHECK(n == 2);
}

TEST_CASE("SVG plot", "[io][plot]") {
    ScanConfig cfg;
    cfg.timing = false;
    const auto records = run_inflation_scan(cfg);
    REQUIRE(records.size() == 9);
    const auto svg = render_plot(records);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(count_matches(svg, "<circle") == 9);
    CHECK(count_matches(svg, "class=\"fit\"") == 1);
    CHECK_THAT(svg, ContainsSubstring("slope = 0.37"));
    CHECK(svg.find("href") == std::string::npos);
    const auto path = scratch("plot.svg");
    emit_plot(records, path);
    CHECK(read_file(path) == svg);
    PlotOptions bad;
    bad.y_field = "wall_ms";
    CHECK_THROWS_AS(render_plot(records, bad), UsageError);
    CHECK_THROWS_AS(write_text("/nonexistent/dir/x.csv", "x"), ResourceError);
}
