#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hwnas/genotype.hpp"

namespace hwnas {

enum class Dataset { cifar10 = 0, cifar100 = 1, in16 = 2 };

enum class DeviceId { edgegpu = 0, raspi4 = 1, edgetpu = 2, pixel3 = 3, eyeriss = 4, fpga = 5 };

inline constexpr int kNumDevices = 6;
inline constexpr int kNumDatasets = 3;

const char* device_name(DeviceId d);
DeviceId device_from_name(const std::string& name);  // throws ParseError
const char* dataset_name(Dataset d);
Dataset dataset_from_name(const std::string& name);  // throws ParseError

/// One architecture's tabulated results. Missing cells (empty CSV fields)
/// are stored as NaN and surface as LookupError on access.
struct BenchRow {
    std::array<double, kNumDatasets> accuracy{};  // percent
    double macs_m = 0.0;
    std::array<double, kNumDevices> latency_ms{};

    bool operator==(const BenchRow&) const = default;
};

/// Tabulated benchmark over the 15,625-genotype space: per-dataset test
/// accuracies, MACs and per-device latencies, keyed by the canonical
/// architecture string. Partial tables are permitted (complete() reports
/// whether all rows are present). Read-only after load; safe to share
/// across threads.
class BenchTable {
public:
    BenchTable() : rows_(kSpaceSize) {}

    /// Throws DuplicateKeyError if the architecture is already present.
    void insert(const Genotype& g, const BenchRow& row);

    bool contains(const Genotype& g) const { return rows_[g.index()].has_value(); }
    std::size_t size() const { return count_; }
    bool complete() const { return count_ == kSpaceSize; }

    /// Throws LookupError naming the canonical string when absent.
    const BenchRow& at(const Genotype& g) const;

    /// Stored test accuracy in percent; pure lookup.
    double accuracy(const Genotype& g, Dataset ds) const;

    /// Stored latency in milliseconds; LookupError when the row or the
    /// device cell is missing.
    double latency(const Genotype& g, DeviceId device) const;

    const std::optional<BenchRow>& row_by_index(std::uint32_t idx) const { return rows_[idx]; }

private:
    std::vector<std::optional<BenchRow>> rows_;
    std::size_t count_ = 0;
};

/// Stored test accuracy for an architecture; see BenchTable::accuracy.
double tabular_accuracy(const BenchTable& table, const Genotype& g, Dataset ds);

/// Exact benchmark CSV header. One row per architecture, UTF-8, '.' decimal
/// separator, no thousands separators; an empty numeric field marks a value
/// as unavailable.
inline constexpr const char* kBenchCsvHeader =
    "arch_str,cifar10_test,cifar100_test,in16_test,macs_m,"
    "edgegpu_ms,raspi4_ms,edgetpu_ms,pixel3_ms,eyeriss_ms,fpga_ms";

/// Load and validate a benchmark CSV. Throws SchemaError (naming line and
/// column), DuplicateKeyError, or a filesystem error message.
BenchTable load_bench(const std::string& path);

/// Write a table in the benchmark CSV format, rows in index order, values
/// printed with shortest round-trip formatting.
void write_bench(const BenchTable& table, const std::string& path);

}  // namespace hwnas
