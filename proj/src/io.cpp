#include "spcvm/io.hpp"

#include "spcvm/cache.hpp"
#include "spcvm/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace spcvm {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const std::string& path, std::size_t lineno) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::data, path + ":" + std::to_string(lineno) +
                                         ": cannot parse number '" + s + "'");
    }
}

} // namespace

CsvData read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::data, "cannot open data file '" + path + "'");

    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorKind::data, path + ": empty file");

    std::vector<std::string> header = split_line(line);
    for (auto& h : header) h = trim(h);
    int p;
    if (header == std::vector<std::string>{"field", "x", "y", "v1"}) {
        p = 1;
    } else if (header == std::vector<std::string>{"field", "x", "y", "v1", "v2"}) {
        p = 2;
    } else {
        throw Error(ErrorKind::data,
                    path + ":1: header must be 'field,x,y,v1' or 'field,x,y,v1,v2'");
    }

    CsvData csv;
    csv.p = p;
    std::vector<double> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size())
            throw Error(ErrorKind::data, path + ":" + std::to_string(lineno) + ": expected " +
                                             std::to_string(header.size()) + " columns, got " +
                                             std::to_string(cells.size()));
        csv.field.push_back(trim(cells[0]));
        csv.x.push_back(parse_double(trim(cells[1]), path, lineno));
        csv.y.push_back(parse_double(trim(cells[2]), path, lineno));
        values.push_back(parse_double(trim(cells[3]), path, lineno));
        if (p == 2) values.push_back(parse_double(trim(cells[4]), path, lineno));
    }
    const std::size_t nrows = csv.field.size();
    if (nrows == 0) throw Error(ErrorKind::data, path + ": no data rows");
    csv.values = Mat(nrows, static_cast<std::size_t>(p));
    std::copy(values.begin(), values.end(), csv.values.data());
    return csv;
}

namespace {

std::vector<std::string> unique_labels_in_order(const std::vector<std::string>& field) {
    std::vector<std::string> labels;
    for (const auto& f : field)
        if (std::find(labels.begin(), labels.end(), f) == labels.end()) labels.push_back(f);
    return labels;
}

} // namespace

FieldDataset dataset_from_csv(const CsvData& csv) {
    const std::vector<std::string> labels = unique_labels_in_order(csv.field);
    const std::size_t kfields = labels.size();
    if (kfields < 2) throw Error(ErrorKind::data, "data must contain at least 2 fields");

    const std::size_t nrows = csv.field.size();
    if (nrows % kfields != 0)
        throw Error(ErrorKind::data, "fields have unequal numbers of rows");
    const std::size_t n = nrows / kfields;
    const int grid_size = static_cast<int>(std::llround(std::sqrt(static_cast<double>(n))));
    if (static_cast<std::size_t>(grid_size) * grid_size != n || grid_size < 2)
        throw Error(ErrorKind::data, "rows per field (" + std::to_string(n) +
                                         ") is not a square lattice size");

    FieldDataset data;
    data.lattice = build_lattice(grid_size);
    data.labels = labels;

    std::map<std::string, std::size_t> label_index;
    for (std::size_t k = 0; k < kfields; ++k) label_index[labels[k]] = k;

    const std::size_t p = static_cast<std::size_t>(csv.p);
    data.fields.assign(kfields, Mat(n, p));
    std::vector<std::vector<bool>> seen(kfields, std::vector<bool>(n, false));

    // nearest lattice site per row; the lattice is regular, so invert the
    // coordinate directly and verify the 1e-9 match
    const int g = grid_size;
    auto axis_index = [&](double coord) {
        int idx = static_cast<int>(std::llround(coord * (g - 1)));
        return std::clamp(idx, 0, g - 1);
    };

    for (std::size_t r = 0; r < nrows; ++r) {
        const std::size_t k = label_index[csv.field[r]];
        const int ix = axis_index(csv.x[r]);
        const int iy = axis_index(csv.y[r]);
        const std::size_t site = static_cast<std::size_t>(iy) * g + ix;
        const double dx = csv.x[r] - data.lattice.xs[site];
        const double dy = csv.y[r] - data.lattice.ys[site];
        if (std::sqrt(dx * dx + dy * dy) > 1e-9)
            throw Error(ErrorKind::data,
                        "row " + std::to_string(r + 2) + ": coordinates (" + fmt_double(csv.x[r]) +
                            ", " + fmt_double(csv.y[r]) + ") do not match any lattice site");
        if (seen[k][site])
            throw Error(ErrorKind::data, "field '" + csv.field[r] + "' covers site " +
                                             std::to_string(site) + " more than once");
        seen[k][site] = true;
        for (std::size_t c = 0; c < p; ++c) data.fields[k](site, c) = csv.values(r, c);
    }

    for (std::size_t k = 0; k < kfields; ++k)
        for (std::size_t s = 0; s < n; ++s)
            if (!seen[k][s])
                throw Error(ErrorKind::data, "field '" + labels[k] + "' is missing site " +
                                                 std::to_string(s));
    return data;
}

std::vector<Mat> groups_from_csv(const CsvData& csv, std::vector<std::string>* labels_out) {
    const std::vector<std::string> labels = unique_labels_in_order(csv.field);
    if (labels.size() < 2) throw Error(ErrorKind::data, "data must contain at least 2 fields");

    std::map<std::string, std::size_t> label_index;
    for (std::size_t k = 0; k < labels.size(); ++k) label_index[labels[k]] = k;

    std::vector<std::vector<double>> rows(labels.size());
    const std::size_t p = static_cast<std::size_t>(csv.p);
    for (std::size_t r = 0; r < csv.field.size(); ++r) {
        auto& dst = rows[label_index[csv.field[r]]];
        for (std::size_t c = 0; c < p; ++c) dst.push_back(csv.values(r, c));
    }

    std::vector<Mat> groups;
    for (const auto& flat : rows) {
        const std::size_t n = flat.size() / p;
        Mat g(n, p);
        std::copy(flat.begin(), flat.end(), g.data());
        groups.push_back(std::move(g));
    }
    if (labels_out) *labels_out = labels;
    return groups;
}

std::string results_csv_string(const ResultsTable& table) {
    std::ostringstream os;
    os << "phi,delta,method,rejection_rate\n";
    for (const ResultsRow& row : table.rows)
        os << fmt_double(row.phi) << ',' << fmt_double(row.delta) << ',' << row.method << ','
           << fmt_double(row.rejection_rate) << '\n';
    return os.str();
}

void write_results_csv(const ResultsTable& table, const std::string& path) {
    write_text_file(path, results_csv_string(table));
}

std::string test_result_record(const TestResult& result, const CalibrationConfig& calib) {
    nlohmann::json fhat = nlohmann::json::array();
    for (std::size_t i = 0; i < result.fhat.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t k = 0; k < result.fhat.cols(); ++k)
            row.push_back(fmt_double(result.fhat(i, k)));
        fhat.push_back(std::move(row));
    }
    nlohmann::json j{{"Tn", fmt_double(result.tn)},
                     {"a", fmt_double(result.a)},
                     {"nu", fmt_double(result.nu)},
                     {"p_value", fmt_double(result.p_value)},
                     {"eff_n", fmt_double(result.eff_n)},
                     {"copula_values", std::move(fhat)},
                     {"calibration_key", calibration_cache_key(calib)}};
    return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::data, "cannot open '" + path + "' for writing");
    out << contents;
}

} // namespace spcvm
