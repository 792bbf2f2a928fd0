#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "threadforge/data/ingest.hpp"
#include "threadforge/data/validate.hpp"

// Archives shaped like the public PHEME release, with the published label
// counts of two events.
using namespace threadforge;
using namespace threadforge::testing;

namespace {

void write_threads(const std::filesystem::path& dir, std::size_t count, Rng& rng, const char* is_rumour,
                   std::optional<int> misinformation, std::optional<int> true_flag) {
    for (std::size_t i = 0; i < count; ++i) {
        ArchiveThread a{random_thread(rng, 1 + rng.below(3), "", "", binary(LabelValue::rumour), {"w", "x", "y"})};
        a.is_rumour = is_rumour;
        a.misinformation = misinformation;
        a.true_flag = true_flag;
        write_archive_thread(dir, a);
    }
}

}  // namespace

TEST_CASE("Charlie Hebdo binary counts") {
    const auto root = temp_dir("charlie");
    const auto ev = root / "charliehebdo-all-rnr-threads";
    Rng rng(11);
    write_threads(ev / "rumours", 458, rng, "rumour", 0, 0);
    write_threads(ev / "non-rumours", 1621, rng, "nonrumour", std::nullopt, std::nullopt);

    const auto result = ingest_pheme(root, LabelScheme::binary);
    const auto report = validate_dataset(result.dataset);
    CHECK(report.ok());
    CHECK(report.count("charliehebdo", LabelValue::rumour) == 458);
    CHECK(report.count("charliehebdo", LabelValue::non_rumour) == 1621);
    CHECK(result.skipped.empty());
    std::filesystem::remove_all(root);
}

TEST_CASE("Sydney siege ternary counts") {
    const auto root = temp_dir("sydney");
    const auto ev = root / "sydneysiege-all-rnr-threads";
    Rng rng(12);
    write_threads(ev / "rumours", 382, rng, "rumour", 0, 1);
    write_threads(ev / "rumours", 86, rng, "rumour", 1, 0);
    write_threads(ev / "rumours", 54, rng, "rumour", 0, 0);
    write_threads(ev / "non-rumours", 40, rng, "nonrumour", std::nullopt, std::nullopt);

    const auto result = ingest_pheme(root, LabelScheme::ternary);
    const auto report = validate_dataset(result.dataset);
    CHECK(report.count("sydneysiege", LabelValue::true_) == 382);
    CHECK(report.count("sydneysiege", LabelValue::false_) == 86);
    CHECK(report.count("sydneysiege", LabelValue::unverified) == 54);
    // Non-rumours carry no veracity label and are reported as skipped.
    CHECK(result.skipped.size() == 40);
    std::filesystem::remove_all(root);
}
