#include "hwnas/bench_table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hwnas/errors.hpp"

namespace hwnas {

namespace {

constexpr const char* kDeviceNames[kNumDevices] = {"edgegpu", "raspi4", "edgetpu",
                                                   "pixel3",  "eyeriss", "fpga"};
constexpr const char* kDatasetNames[kNumDatasets] = {"cifar10", "cifar100", "in16"};

std::string format_double(double v) {
    std::array<char, 32> buf;
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

}  // namespace

const char* device_name(DeviceId d) { return kDeviceNames[static_cast<int>(d)]; }

DeviceId device_from_name(const std::string& name) {
    for (int i = 0; i < kNumDevices; ++i)
        if (name == kDeviceNames[i]) return static_cast<DeviceId>(i);
    throw ParseError("unknown device '" + name + "'");
}

const char* dataset_name(Dataset d) { return kDatasetNames[static_cast<int>(d)]; }

Dataset dataset_from_name(const std::string& name) {
    for (int i = 0; i < kNumDatasets; ++i)
        if (name == kDatasetNames[i]) return static_cast<Dataset>(i);
    throw ParseError("unknown dataset '" + name + "'");
}

void BenchTable::insert(const Genotype& g, const BenchRow& row) {
    auto& slot = rows_[g.index()];
    if (slot.has_value())
        throw DuplicateKeyError("duplicate architecture '" + format_arch_str(g) + "'");
    slot = row;
    ++count_;
}

const BenchRow& BenchTable::at(const Genotype& g) const {
    const auto& slot = rows_[g.index()];
    if (!slot.has_value())
        throw LookupError("architecture '" + format_arch_str(g) + "' not present in table");
    return *slot;
}

double BenchTable::accuracy(const Genotype& g, Dataset ds) const {
    const double v = at(g).accuracy[static_cast<int>(ds)];
    if (std::isnan(v))
        throw LookupError("architecture '" + format_arch_str(g) + "' has no " +
                          dataset_name(ds) + " accuracy");
    return v;
}

double BenchTable::latency(const Genotype& g, DeviceId device) const {
    const double v = at(g).latency_ms[static_cast<int>(device)];
    if (std::isnan(v))
        throw LookupError("architecture '" + format_arch_str(g) + "' has no " +
                          device_name(device) + " latency");
    return v;
}

double tabular_accuracy(const BenchTable& table, const Genotype& g, Dataset ds) {
    return table.accuracy(g, ds);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

// Empty field -> NaN (missing). Anything else must parse fully as a finite,
// non-negative double.
double parse_field(const std::string& field, std::size_t line, std::size_t column) {
    if (field.empty()) return std::nan("");
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw SchemaError(line, column, "cannot parse numeric field '" + field + "'");
    if (!std::isfinite(v)) throw SchemaError(line, column, "non-finite value '" + field + "'");
    if (v < 0.0) throw SchemaError(line, column, "negative value '" + field + "'");
    return v;
}

}  // namespace

BenchTable load_bench(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open benchmark file '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw SchemaError(1, 1, "empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kBenchCsvHeader)
        throw SchemaError(1, 1, "header does not match the benchmark CSV contract");

    BenchTable table;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        const auto fields = split_csv_line(line);
        if (fields.size() != 11)
            throw SchemaError(line_no, fields.size(),
                              "expected 11 fields, got " + std::to_string(fields.size()));

        Genotype g;
        try {
            g = parse_arch_str(fields[0]);
        } catch (const ParseError& e) {
            throw SchemaError(line_no, 1, e.what());
        }

        BenchRow row;
        for (int d = 0; d < kNumDatasets; ++d)
            row.accuracy[d] = parse_field(fields[1 + d], line_no, 2 + d);
        row.macs_m = parse_field(fields[4], line_no, 5);
        if (std::isnan(row.macs_m)) throw SchemaError(line_no, 5, "macs_m may not be empty");
        for (int d = 0; d < kNumDevices; ++d)
            row.latency_ms[d] = parse_field(fields[5 + d], line_no, 6 + d);

        try {
            table.insert(g, row);
        } catch (const DuplicateKeyError& e) {
            throw DuplicateKeyError(std::string(e.what()) + " at line " + std::to_string(line_no));
        }
    }
    return table;
}

void write_bench(const BenchTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << kBenchCsvHeader << '\n';
    for (std::uint32_t idx = 0; idx < kSpaceSize; ++idx) {
        const auto& slot = table.row_by_index(idx);
        if (!slot.has_value()) continue;
        const BenchRow& row = *slot;
        out << format_arch_str(Genotype::from_index(idx));
        for (int d = 0; d < kNumDatasets; ++d)
            out << ',' << (std::isnan(row.accuracy[d]) ? "" : format_double(row.accuracy[d]));
        out << ',' << format_double(row.macs_m);
        for (int d = 0; d < kNumDevices; ++d)
            out << ',' << (std::isnan(row.latency_ms[d]) ? "" : format_double(row.latency_ms[d]));
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace hwnas
