#include <catch2/catch.hpp>

#include <cstring>
#include <map>

#include "ganids/dataio.hpp"
#include "testutil.hpp"

using namespace ganids;

TEST_CASE("load_csv parses a plain header+rows file") {
    TempDir td;
    write_file(td.file("a.csv"),
               "f1,f2,Label\n"
               "1.5,2,alpha\n"
               "3,4.25,beta\n");
    RawFlowTable t = load_csv(td.file("a.csv"), "Label");
    REQUIRE(t.n_rows() == 2);
    REQUIRE(t.feature_names == std::vector<std::string>{"f1", "f2"});
    CHECK(t.cells(0, 0) == 1.5);
    CHECK(t.cells(1, 1) == 4.25);
    CHECK(t.labels[0] == "alpha");
}

TEST_CASE("invalid numeric cells are retained as markers, not dropped") {
    TempDir td;
    write_file(td.file("a.csv"),
               "f1,f2,Label\n"
               "Infinity,2,x\n"
               "NaN,3,x\n"
               "garbage,4,x\n"
               ",5,x\n");
    RawFlowTable t = load_csv(td.file("a.csv"), "Label");
    REQUIRE(t.n_rows() == 4);
    CHECK(std::isinf(t.cells(0, 0)));
    CHECK(std::isnan(t.cells(1, 0)));
    CHECK(std::isnan(t.cells(2, 0)));
    CHECK(std::isnan(t.cells(3, 0)));
    CHECK(t.cells(0, 1) == 2.0);
}

TEST_CASE("mixed infinity spellings all parse as non-finite") {
    for (const char* s : {"Infinity", "infinity", "INF", "inf", "-Infinity", "NaN", "nan"})
        CHECK_FALSE(std::isfinite(parse_cell(s)));
    CHECK(parse_cell("  7.5 ") == 7.5);
}

TEST_CASE("structural errors: missing file, missing label column, ragged row") {
    TempDir td;
    CHECK_THROWS_AS(load_csv(td.file("nope.csv"), "Label"), DataError);

    write_file(td.file("nolabel.csv"), "a,b\n1,2\n");
    CHECK_THROWS_AS(load_csv(td.file("nolabel.csv"), "Label"), DataError);

    write_file(td.file("ragged.csv"), "a,b,Label\n1,2,x\n1,2\n");
    try {
        load_csv(td.file("ragged.csv"), "Label");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        // row number is part of the message
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
}

TEST_CASE("quoted fields and CRLF are handled") {
    TempDir td;
    write_file(td.file("q.csv"), "a,Label\r\n\"1.5\",\"with, comma\"\r\n");
    RawFlowTable t = load_csv(td.file("q.csv"), "Label");
    REQUIRE(t.n_rows() == 1);
    CHECK(t.cells(0, 0) == 1.5);
    CHECK(t.labels[0] == "with, comma");
}

TEST_CASE("label normalization trims and folds dash variants") {
    CHECK(normalize_label("  Bot  ") == "Bot");
    CHECK(normalize_label("Web Attack \xE2\x80\x93 XSS") == "Web Attack - XSS");
    CHECK(normalize_label("Web Attack \x96 XSS") == "Web Attack - XSS");
}

static RawFlowTable tiny_table(const std::vector<std::vector<double>>& rows,
                               const std::vector<std::string>& labels) {
    RawFlowTable t;
    std::size_t d = rows.empty() ? 0 : rows[0].size();
    for (std::size_t i = 0; i < d; ++i) t.feature_names.push_back("f" + std::to_string(i));
    t.column_names = t.feature_names;
    t.column_names.push_back("Label");
    t.label_column = "Label";
    t.label_index = d;
    t.cells = Matrix(rows.size(), d);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < d; ++c) t.cells(r, c) = rows[r][c];
    t.labels = labels;
    return t;
}

TEST_CASE("clean keeps exactly the all-finite rows") {
    auto t = tiny_table({{1, 2}, {std::numeric_limits<double>::infinity(), 3}, {4, 5}},
                        {"a", "a", "b"});
    CleanDataset ds = clean(t);
    REQUIRE(ds.n_rows() == 2);
    CHECK(ds.features(0, 0) == 1.0);
    CHECK(ds.features(1, 1) == 5.0);
    CHECK(ds.class_counts == std::vector<std::size_t>{1, 1});
}

TEST_CASE("clean is byte-exact on surviving cells") {
    double odd = 0.1 + 0.2;  // not representable crisply; must survive untouched
    auto t = tiny_table({{odd, 1e-307}, {std::nan(""), 0}}, {"a", "b"});
    CleanDataset ds = clean(t);
    REQUIRE(ds.n_rows() == 1);
    CHECK(std::memcmp(&ds.features(0, 0), &odd, sizeof(double)) == 0);
}

TEST_CASE("clean with zero surviving rows is an error") {
    auto t = tiny_table({{std::nan(""), 1}}, {"a"});
    CHECK_THROWS_AS(clean(t), DataError);
}

TEST_CASE("clean counts sum to row count") {
    auto t = tiny_table({{1, 1}, {2, 2}, {3, 3}}, {"x", "y", "x"});
    CleanDataset ds = clean(t);
    std::size_t sum = 0;
    for (auto c : ds.class_counts) sum += c;
    CHECK(sum == ds.n_rows());
}

TEST_CASE("regroup maps labels and keeps features and order") {
    auto t = tiny_table({{1, 0}, {2, 0}, {3, 0}}, {"DoS Hulk", "Heartbleed", "Bot"});
    CleanDataset ds = clean(t);
    CleanDataset g = regroup_labels(ds, default_grouping());
    REQUIRE(g.n_rows() == 3);
    CHECK(g.label_name(0) == "DoS");
    CHECK(g.label_name(1) == "DoS");
    CHECK(g.label_name(2) == "Botnet");
    CHECK(g.features == ds.features);
}

TEST_CASE("identity grouping leaves the dataset unchanged") {
    auto t = tiny_table({{1, 0}, {2, 0}}, {"a", "b"});
    CleanDataset ds = clean(t);
    CleanDataset g = regroup_labels(ds, identity_grouping(ds));
    CHECK(g.class_names == ds.class_names);
    CHECK(g.labels == ds.labels);
    CHECK(g.features == ds.features);
}

TEST_CASE("regroup with an unmapped label names it") {
    auto t = tiny_table({{1, 0}}, {"Martian Probe"});
    CleanDataset ds = clean(t);
    ClassGrouping g;  // empty
    try {
        regroup_labels(ds, g);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("Martian Probe") != std::string::npos);
    }
}

TEST_CASE("published class table regroups to the eight-class table") {
    // processed dataset counts per original class
    std::map<std::string, std::size_t> orig{
        {"BENIGN", 2271320},       {"DoS Hulk", 230124},
        {"PortScan", 158804},      {"DDoS", 128025},
        {"DoS GoldenEye", 10293},  {"FTP-Patator", 7935},
        {"SSH-Patator", 5897},     {"DoS slowloris", 5796},
        {"DoS Slowhttptest", 5499},{"Bot", 1956},
        {"Web Attack - Brute Force", 1507}, {"Web Attack - XSS", 652},
        {"Infiltration", 36},      {"Web Attack - Sql Injection", 21},
        {"Heartbleed", 11}};
    ClassGrouping g = default_grouping();
    std::map<std::string, std::size_t> general;
    std::size_t total_in = 0;
    for (const auto& [label, n] : orig) {
        general[g.general_class(label)] += n;
        total_in += n;
    }
    CHECK(general["Benign"] == 2271320u);
    CHECK(general["DoS"] == 251723u);
    CHECK(general["Probe"] == 158804u);
    CHECK(general["DDoS"] == 128025u);
    CHECK(general["Brute Force"] == 13832u);
    CHECK(general["Web Attack"] == 2180u);
    CHECK(general["Botnet"] == 1956u);
    CHECK(general["Infiltration"] == 36u);
    REQUIRE(general.size() == 8);
    std::size_t total_out = 0;
    for (const auto& [_, n] : general) total_out += n;
    CHECK(total_in == total_out);
}

TEST_CASE("merge concatenates in argument order and rejects mismatched headers") {
    auto a = tiny_table({{1, 2}}, {"x"});
    auto b = tiny_table({{3, 4}}, {"y"});
    RawFlowTable m = merge({a, b});
    REQUIRE(m.n_rows() == 2);
    CHECK(m.labels[0] == "x");
    CHECK(m.labels[1] == "y");

    RawFlowTable c = b;
    c.column_names[0] = "other";
    CHECK_THROWS_AS(merge({a, c}), DataError);
}

TEST_CASE("columnar cache round-trips bit-exactly") {
    TempDir td;
    auto t = tiny_table({{0.1 + 0.2, -1e-300}, {3.25, 4.5}, {5.0, 6.0}}, {"a", "b", "a"});
    CleanDataset ds = clean(t);
    save_cache(ds, td.file("c.bin"));
    CleanDataset back = load_cache(td.file("c.bin"));
    CHECK(back.feature_names == ds.feature_names);
    CHECK(back.class_names == ds.class_names);
    CHECK(back.labels == ds.labels);
    CHECK(back.class_counts == ds.class_counts);
    REQUIRE(back.features.data.size() == ds.features.data.size());
    CHECK(std::memcmp(back.features.data.data(), ds.features.data.data(),
                      ds.features.data.size() * sizeof(double)) == 0);
}

TEST_CASE("cache rejects garbage") {
    TempDir td;
    write_file(td.file("junk.bin"), "not a cache at all");
    CHECK_THROWS_AS(load_cache(td.file("junk.bin")), DataError);
}

TEST_CASE("load_csv_dir merges files in name order") {
    TempDir td;
    write_file(td.file("b.csv"), "f,Label\n2,x\n");
    write_file(td.file("a.csv"), "f,Label\n1,x\n");
    RawFlowTable t = load_csv_dir(td.path, "Label");
    REQUIRE(t.n_rows() == 2);
    CHECK(t.cells(0, 0) == 1.0);
    CHECK(t.cells(1, 0) == 2.0);
}
