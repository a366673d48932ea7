#include "doctest.h"

#include "aerofuse/taxonomy.hpp"
#include "aerofuse/text.hpp"

#include <set>

using namespace aerofuse;

TEST_CASE("built-in taxonomy has the production counts") {
    const auto& t = Taxonomy::default_taxonomy();
    CHECK(t.root() == "aircraft");
    CHECK(t.level2().size() == 6);
    CHECK(t.level3().size() == 61);
    const std::set<std::string> functions(t.level2().begin(), t.level2().end());
    CHECK(functions == std::set<std::string>{"bomber", "civilian", "combat", "drone", "special", "transport"});
}

TEST_CASE("fixed parent pairs") {
    const auto& t = Taxonomy::default_taxonomy();
    CHECK(t.parent_of("F-16") == "combat");
    CHECK(t.parent_of("Tu-95") == "bomber");
    CHECK(t.ancestor(t.label("F-16"), 2) == Label{"combat", 2});
    CHECK(t.ancestor(t.label("F-16"), 1) == Label{"aircraft", 1});
    CHECK(t.ancestor(Label{"combat", 2}, 2) == Label{"combat", 2});
}

TEST_CASE("every level-3 label has exactly one level-2 parent") {
    const auto& t = Taxonomy::default_taxonomy();
    for (const auto& name : t.level3()) {
        const auto& p = t.parent_of(name);
        CHECK(t.level_of(p) == 2);
        CHECK(t.level_of(name) == 3);
    }
    CHECK(t.level_of("aircraft") == 1);
    CHECK(t.level_of("no-such-plane") == 0);
}

TEST_CASE("indices are positions in the label lists") {
    const auto& t = Taxonomy::default_taxonomy();
    for (std::size_t i = 0; i < t.level3().size(); ++i) CHECK(t.level3_index(t.level3()[i]) == i);
    for (std::size_t i = 0; i < t.level2().size(); ++i) CHECK(t.level2_index(t.level2()[i]) == i);
}

TEST_CASE("shipped data file matches the embedded default") {
    const auto file = Taxonomy::load_file(std::string(AEROFUSE_DATA_DIR) + "/taxonomy.txt",
                                          TaxonomyLoadOptions{true});
    const auto& t = Taxonomy::default_taxonomy();
    CHECK(file.level2() == t.level2());
    CHECK(file.level3() == t.level3());
}

TEST_CASE("small custom taxonomy parses without strict counts") {
    const auto t = Taxonomy::parse("root: aircraft\nlevel2: combat\n# comment\nlevel3: F-16 -> combat\n");
    CHECK(t.level3().size() == 1);
    CHECK(t.label("F-16") == Label{"F-16", 3});
}

TEST_CASE("malformed taxonomies are rejected") {
    CHECK_THROWS_AS(Taxonomy::parse("root: aircraft\nlevel2: a\nlevel2: a\n"), TaxonomyError);
    CHECK_THROWS_AS(Taxonomy::parse("root: aircraft\nlevel3: x -> missing\n"), TaxonomyError);
    CHECK_THROWS_AS(Taxonomy::parse("root: aircraft\nlevel2: a\nlevel3: x -> a\n", {true}), TaxonomyError);
    CHECK_THROWS_AS(Taxonomy::parse("root: aircraft\nfoo: bar\n"), TaxonomyError);
    CHECK_THROWS_AS(Taxonomy::default_taxonomy().label("nope"), TaxonomyError);
}
