#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace curvecorrect {

/// One published (or simulated) classification result.
struct AccuracyRecord {
    std::int64_t n = 0;    ///< training sample size, >= 2
    double accuracy = 0.0; ///< reported accuracy, in (0, 1] for real data
    std::string study_id;  ///< optional opaque label; empty means absent
    bool published = true;
    bool clipped = false;  ///< simulated draw exceeded 1.0 and was clipped

    bool operator==(const AccuracyRecord&) const = default;
};

struct Dataset {
    std::string name;
    std::vector<AccuracyRecord> records;
    std::string provenance;  ///< free-text citation for the data source
};

}  // namespace curvecorrect
