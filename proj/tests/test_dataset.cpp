#include <doctest.h>

#include <array>

#include "fmda/dataset.hpp"
#include "fmda/errors.hpp"

using namespace fmda;

namespace {

LabeledDataset small() {
    LabeledDataset d;
    d.features = Matrix::from_rows({{0, 1}, {2, 3}, {4, 5}, {6, 7}});
    d.labels = {0, 1, 1, 2};
    d.ids = {10, 11, 12, 13};
    d.domain = Domain::kTarget;
    return d;
}

}  // namespace

TEST_CASE("domain names") {
    CHECK(to_string(Domain::kSource) == "source");
    CHECK(parse_domain("target") == Domain::kTarget);
    CHECK_THROWS_AS(parse_domain("other"), ConfigError);
}

TEST_CASE("validate checks lengths and label range") {
    LabeledDataset d = small();
    CHECK_NOTHROW(d.validate(3));
    CHECK_THROWS_AS(d.validate(2), ConfigError);
    d.ids.pop_back();
    CHECK_THROWS_AS(d.validate(3), ConfigError);
    LabeledDataset neg = small();
    neg.labels[0] = -1;
    CHECK_THROWS_AS(neg.validate(3), ConfigError);
    CHECK(small().inferred_classes() == 3);
}

TEST_CASE("subsets keep rows, labels, ids and domain together") {
    const LabeledDataset d = small();
    const std::array<std::size_t, 2> rows{3, 1};
    const LabeledDataset s = d.subset(rows);
    CHECK(s.features == Matrix::from_rows({{6, 7}, {2, 3}}));
    CHECK(s.labels == std::vector<int>{2, 1});
    CHECK(s.ids == std::vector<std::uint64_t>{13, 11});
    CHECK(s.domain == Domain::kTarget);

    const std::array<std::uint64_t, 2> ids{12, 10};
    const LabeledDataset t = d.subset_by_ids(ids);
    CHECK(t.features == Matrix::from_rows({{4, 5}, {0, 1}}));
    CHECK(t.labels == std::vector<int>{1, 0});
    const std::array<std::uint64_t, 1> missing{99};
    CHECK_THROWS_AS(d.subset_by_ids(missing), ConfigError);
}

TEST_CASE("class index groups rows and reports empty classes") {
    const LabeledDataset d = small();
    ClassIndex idx(d, 4);
    CHECK(idx.of(0) == std::vector<std::size_t>{0});
    CHECK(idx.of(1) == std::vector<std::size_t>{1, 2});
    CHECK(idx.of(3).empty());
    CHECK_THROWS_WITH_AS(idx.require_all_present("probe"), doctest::Contains("class 3"), ConfigError);
    CHECK_NOTHROW(ClassIndex(d, 3).require_all_present("probe"));
}
