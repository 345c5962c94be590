#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "proelm/dataset.hpp"
#include "proelm/errors.hpp"
#include "proelm/metrics.hpp"

using namespace proelm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("proelm_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
  fs::path file(const std::string& name, const std::string& contents) const {
    fs::path p = path / name;
    std::ofstream out(p);
    out << contents;
    return p;
  }
};

}  // namespace

TEST_CASE("csv labels in 0/1 form are remapped to -1/+1") {
  TempDir dir;
  fs::path p = dir.file("a.csv",
                        "f0,f1,l0\n"
                        "0.5,1.0,1\n"
                        "-0.25,2.0,0\n");
  Dataset ds = parse_csv(p, LabelSelector::by_trailing(1));
  CHECK(ds.sample_count() == 2);
  CHECK(ds.feature_count() == 2);
  CHECK(ds.label_count() == 1);
  CHECK(ds.targets(0, 0) == 1.0);
  CHECK(ds.targets(1, 0) == -1.0);
  CHECK(ds.features(1, 0) == -0.25);
  CHECK(ds.label_names == std::vector<std::string>{"l0"});
  CHECK(ds.feature_names == std::vector<std::string>{"f0", "f1"});
}

TEST_CASE("csv labels can be picked by name, in the given order") {
  TempDir dir;
  fs::path p = dir.file("b.csv",
                        "x,tag_b,y,tag_a\n"
                        "1,0,2,1\n"
                        "3,1,4,0\n");
  Dataset ds = parse_csv(p, LabelSelector::by_names({"tag_a", "tag_b"}));
  CHECK(ds.label_names == std::vector<std::string>{"tag_a", "tag_b"});
  CHECK(ds.feature_names == std::vector<std::string>{"x", "y"});
  CHECK(ds.targets(0, 0) == 1.0);   // tag_a row 0
  CHECK(ds.targets(0, 1) == -1.0);  // tag_b row 0
  CHECK(ds.features(1, 1) == 4.0);

  CHECK_THROWS_AS(parse_csv(p, LabelSelector::by_names({"missing"})), ParseError);
}

TEST_CASE("csv parse errors name the offending line") {
  TempDir dir;
  SUBCASE("label outside {0,1,-1}") {
    fs::path p = dir.file("c.csv", "f,l\n1.0,2\n");
    try {
      parse_csv(p, LabelSelector::by_trailing(1));
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("ragged row") {
    fs::path p = dir.file("d.csv", "f,l\n1.0,1\n2.0\n");
    try {
      parse_csv(p, LabelSelector::by_trailing(1));
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  SUBCASE("non-numeric feature") {
    fs::path p = dir.file("e.csv", "f,l\nabc,1\n");
    CHECK_THROWS_AS(parse_csv(p, LabelSelector::by_trailing(1)), ParseError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(parse_csv(dir.path / "nope.csv", LabelSelector::by_trailing(1)),
                    IoError);
  }
}

TEST_CASE("csv round-trips through write_csv unchanged") {
  TempDir dir;
  fs::path p = dir.file("f.csv",
                        "f0,f1,l0,l1\n"
                        "0.125,-3.5,-1,1\n"
                        "7.25,0.0078125,1,-1\n");
  Dataset ds = parse_csv(p, LabelSelector::by_trailing(2));
  fs::path q = dir.path / "g.csv";
  write_csv(q, ds);
  Dataset ds2 = parse_csv(q, LabelSelector::by_trailing(2));
  CHECK(ds.features == ds2.features);
  CHECK(ds.targets == ds2.targets);
  CHECK(ds.label_names == ds2.label_names);
  CHECK(ds.feature_names == ds2.feature_names);
}

TEST_CASE("csv round-trip preserves non-representable decimals exactly") {
  Dataset ds;
  ds.features = MatrixXd(2, 2);
  ds.features << 0.1, 0.2, 1.0 / 3.0, 2.7182818284590452;
  ds.targets = MatrixXd(2, 1);
  ds.targets << 1, -1;
  ds.label_names = {"l"};
  ds.feature_names = {"a", "b"};

  TempDir dir;
  fs::path p = dir.path / "h.csv";
  write_csv(p, ds);
  Dataset ds2 = parse_csv(p, LabelSelector::by_trailing(1));
  CHECK(ds.features == ds2.features);
  CHECK(ds.targets == ds2.targets);
}

TEST_CASE("minimal dense arff parses") {
  TempDir dir;
  fs::path p = dir.file("i.arff",
                        "@RELATION tiny\n"
                        "% a comment line\n"
                        "@ATTRIBUTE width numeric\n"
                        "@ATTRIBUTE tag {0,1}\n"
                        "@DATA\n"
                        "1.5,1\n"
                        "2.5,0\n");
  Dataset ds = parse_arff(p, {"tag"});
  CHECK(ds.sample_count() == 2);
  CHECK(ds.feature_count() == 1);
  CHECK(ds.label_count() == 1);
  CHECK(ds.features(0, 0) == 1.5);
  CHECK(ds.targets(0, 0) == 1.0);
  CHECK(ds.targets(1, 0) == -1.0);
  CHECK(ds.feature_names == std::vector<std::string>{"width"});
}

TEST_CASE("sparse arff rows fill unlisted attributes with defaults") {
  TempDir dir;
  fs::path p = dir.file("j.arff",
                        "@relation sparse\n"
                        "@attribute f0 numeric\n"
                        "@attribute f1 numeric\n"
                        "@attribute f2 numeric\n"
                        "@attribute tag {0,1}\n"
                        "@data\n"
                        "{0 1.5, 3 1}\n"
                        "{1 2.0}\n");
  Dataset ds = parse_arff(p, {"tag"});
  CHECK(ds.features(0, 0) == 1.5);
  CHECK(ds.features(0, 1) == 0.0);
  CHECK(ds.features(0, 2) == 0.0);
  CHECK(ds.targets(0, 0) == 1.0);
  CHECK(ds.features(1, 1) == 2.0);
  CHECK(ds.targets(1, 0) == -1.0);  // unlisted label defaults to 0 -> -1
}

TEST_CASE("arff attribute names come back in declaration order") {
  TempDir dir;
  fs::path p = dir.file("k.arff",
                        "@relation names\n"
                        "@attribute \"quoted name\" numeric\n"
                        "@attribute plain numeric\n"
                        "@attribute last {0,1}\n"
                        "@data\n"
                        "1,2,0\n");
  std::vector<std::string> names = arff_attribute_names(p);
  CHECK(names == std::vector<std::string>{"quoted name", "plain", "last"});
}

TEST_CASE("arff parse errors") {
  TempDir dir;
  SUBCASE("undeclared label attribute") {
    fs::path p = dir.file("l.arff",
                          "@relation x\n@attribute f numeric\n@data\n1\n");
    CHECK_THROWS_AS(parse_arff(p, {"ghost"}), ParseError);
  }
  SUBCASE("malformed sparse entry") {
    fs::path p = dir.file("m.arff",
                          "@relation x\n@attribute f numeric\n@attribute tag {0,1}\n"
                          "@data\n{0 abc}\n");
    CHECK_THROWS_AS(parse_arff(p, {"tag"}), ParseError);
  }
  SUBCASE("sparse index out of range") {
    fs::path p = dir.file("n.arff",
                          "@relation x\n@attribute f numeric\n@attribute tag {0,1}\n"
                          "@data\n{5 1.0}\n");
    CHECK_THROWS_AS(parse_arff(p, {"tag"}), ParseError);
  }
  SUBCASE("unsupported attribute type") {
    fs::path p = dir.file("o.arff",
                          "@relation x\n@attribute s string\n@attribute tag {0,1}\n"
                          "@data\nhello,1\n");
    CHECK_THROWS_AS(parse_arff(p, {"tag"}), ParseError);
  }
  SUBCASE("label value outside {0,1}") {
    fs::path p = dir.file("p.arff",
                          "@relation x\n@attribute f numeric\n@attribute tag {0,1}\n"
                          "@data\n1.0,7\n");
    CHECK_THROWS_AS(parse_arff(p, {"tag"}), ParseError);
  }
}

TEST_CASE("dense arff and csv parses of the same table agree") {
  TempDir dir;
  fs::path a = dir.file("q.arff",
                        "@relation both\n"
                        "@attribute f0 numeric\n"
                        "@attribute f1 numeric\n"
                        "@attribute tag {0,1}\n"
                        "@data\n"
                        "0.5,1.5,1\n"
                        "2.5,3.5,0\n");
  fs::path c = dir.file("r.csv", "f0,f1,tag\n0.5,1.5,1\n2.5,3.5,0\n");
  Dataset from_arff = parse_arff(a, {"tag"});
  Dataset from_csv = parse_csv(c, LabelSelector::by_trailing(1));
  CHECK(from_arff.features == from_csv.features);
  CHECK(from_arff.targets == from_csv.targets);
  CHECK(from_arff.label_names == from_csv.label_names);
}

TEST_CASE("synthetic data hits the requested label cardinality") {
  Dataset ds = generate_synthetic(100, 6, 4, 1.0, 11);
  CHECK(ds.sample_count() == 100);
  CHECK(ds.feature_count() == 6);
  CHECK(ds.label_count() == 4);
  LabelStats stats = label_stats(ds.targets);
  CHECK(stats.cardinality >= 0.8);
  CHECK(stats.cardinality <= 1.2);
}

TEST_CASE("synthetic data is deterministic under its seed") {
  Dataset a = generate_synthetic(50, 5, 3, 1.5, 7);
  Dataset b = generate_synthetic(50, 5, 3, 1.5, 7);
  CHECK(a.features == b.features);
  CHECK(a.targets == b.targets);
  Dataset c = generate_synthetic(50, 5, 3, 1.5, 8);
  CHECK(a.features != c.features);
}

TEST_CASE("synthetic saturation and argument validation") {
  Dataset full = generate_synthetic(30, 4, 3, 3.0, 5);
  CHECK((full.targets.array() == 1.0).all());
  CHECK_THROWS_AS(generate_synthetic(30, 4, 3, 0.0, 5), InvalidArgumentError);
  CHECK_THROWS_AS(generate_synthetic(30, 4, 3, 3.5, 5), InvalidArgumentError);
  CHECK_THROWS_AS(generate_synthetic(0, 4, 3, 1.0, 5), InvalidArgumentError);
}
