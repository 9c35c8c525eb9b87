#pragma once

// The validation battery shared by the `validate` subcommand and the
// acceptance runner: numbered criteria 1..10 plus extra invariant rows.

#include <cstdint>
#include <string>
#include <vector>

namespace perturb {

struct CheckRow {
    std::string id;       // "C<k>.<part>" for criteria, "I.<name>" for invariants
    int criterion = 0;    // 0 for invariant rows
    std::string name;
    std::string formula;  // identity exercised, by name
    double value = 0.0;
    double reference = 0.0;
    double tolerance = 0.0;  // |value − reference| ≤ tolerance, or value ≤ tolerance for gap rows
    bool pass = false;
    std::string detail;
};

struct CheckOptions {
    std::uint64_t seed = 20240611;
    unsigned workers = 1;
    // Multiplies every Monte Carlo sample size (criterion sizes at 1).
    double scale = 1.0;
};

/// Identity name for criterion k (static table).
std::string criterion_formula(int k);
std::string criterion_title(int k);

/// Rows of criterion k in 1..10; out-of-range k throws std::out_of_range.
std::vector<CheckRow> run_criterion(int k, const CheckOptions& opt);
std::vector<CheckRow> run_invariants(const CheckOptions& opt);
/// Criteria 1..10 followed by the invariants.
std::vector<CheckRow> run_battery(const CheckOptions& opt);

/// Columns: id,criterion,name,formula,value,reference,tolerance,pass.  No
/// timings, so output depends only on seed and scale.
std::string rows_to_csv(const std::vector<CheckRow>& rows);

}  // namespace perturb
