#pragma once

#include "spcvm/covariance.hpp"
#include "spcvm/rank_test.hpp"
#include "spcvm/rf_sim.hpp"

#include <string>
#include <vector>

namespace spcvm {

// %.17g formatting used for all floating-point text output.
std::string fmt_double(double v);

// Parsed rows of the `field,x,y,v1[,v2]` input format.
struct CsvData {
    int p = 0;
    std::vector<std::string> field;
    std::vector<double> x, y;
    Mat values; // nrows x p
};

CsvData read_csv(const std::string& path);

// Builds a FieldDataset by matching every row to its lattice site (nearest
// coordinate within 1e-9). Every field must cover every site exactly once.
// The lattice is inferred: rows per field must be a perfect square.
FieldDataset dataset_from_csv(const CsvData& csv);

// Group views for the baselines; spatial coordinates are ignored.
std::vector<Mat> groups_from_csv(const CsvData& csv, std::vector<std::string>* labels = nullptr);

std::string results_csv_string(const ResultsTable& table);
void write_results_csv(const ResultsTable& table, const std::string& path);

// Structured-text record for one test run.
std::string test_result_record(const TestResult& result, const CalibrationConfig& calib);

void write_text_file(const std::string& path, const std::string& contents);

} // namespace spcvm
