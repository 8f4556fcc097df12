#include <doctest.h>

#include <stdexcept>

#include "ecdb/pipeline.hpp"

using namespace ecdb;

TEST_CASE("ranks 4 to 6") {
  for (const auto& [c, r] : {std::pair{Curve{-19, 151}, 4}, std::pair{Curve{-217, 1585}, 5},
                             std::pair{Curve{-1126, 6796}, 6}}) {
    CAPTURE(c.str());
    const auto rec = determine_rank(c);
    CHECK(rec.rank_lower == r);
    REQUIRE(rec.rank.has_value());
    CHECK(*rec.rank == r);
    CHECK((rec.rank_status == RankStatus::grh_bsd || rec.rank_status == RankStatus::grh_bsd_parity));
  }
}
