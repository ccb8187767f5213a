#include "groupinv/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace groupinv {

bool GroupedDataset::has_ground_truth() const {
    return !samples.empty() && !samples[0].gt_content.empty();
}

Matrix GroupedDataset::gather_x(const std::vector<int>& indices) const {
    const int d = dim();
    Matrix out(static_cast<int>(indices.size()), d);
    for (size_t i = 0; i < indices.size(); ++i) {
        const Sample& s = samples[static_cast<size_t>(indices[i])];
        for (int j = 0; j < d; ++j) out.at(static_cast<int>(i), j) = s.x[static_cast<size_t>(j)];
    }
    return out;
}

std::vector<int> GroupedDataset::gather_y(const std::vector<int>& indices) const {
    std::vector<int> out(indices.size());
    for (size_t i = 0; i < indices.size(); ++i) out[i] = samples[static_cast<size_t>(indices[i])].y;
    return out;
}

std::vector<int> GroupedDataset::gather_group(const std::vector<int>& indices) const {
    std::vector<int> out(indices.size());
    for (size_t i = 0; i < indices.size(); ++i)
        out[i] = samples[static_cast<size_t>(indices[i])].group;
    return out;
}

namespace {
Matrix gather_field(const GroupedDataset& ds, const std::vector<int>& indices,
                    const std::vector<double> Sample::*field, const char* name) {
    if (ds.samples.empty() || (ds.samples[0].*field).empty()) {
        throw ContractError(std::string("dataset has no ") + name + " ground truth");
    }
    const int d = static_cast<int>((ds.samples[0].*field).size());
    Matrix out(static_cast<int>(indices.size()), d);
    for (size_t i = 0; i < indices.size(); ++i) {
        const std::vector<double>& v = ds.samples[static_cast<size_t>(indices[i])].*field;
        for (int j = 0; j < d; ++j) out.at(static_cast<int>(i), j) = v[static_cast<size_t>(j)];
    }
    return out;
}
}  // namespace

Matrix GroupedDataset::gather_content(const std::vector<int>& indices) const {
    return gather_field(*this, indices, &Sample::gt_content, "content");
}

Matrix GroupedDataset::gather_style(const std::vector<int>& indices) const {
    return gather_field(*this, indices, &Sample::gt_style, "style");
}

void GroupedDataset::validate() const {
    if (samples.empty()) throw ContractError("dataset is empty");
    const size_t d = samples[0].x.size();
    std::vector<char> seen(static_cast<size_t>(group_count), 0);
    for (const Sample& s : samples) {
        if (s.x.size() != d) throw ContractError("inconsistent observation dims within dataset");
        if (s.group < 0 || s.group >= group_count) {
            throw ContractError("sample group " + std::to_string(s.group) +
                                " outside [0, " + std::to_string(group_count) + ")");
        }
        if (s.y != 0 && s.y != 1) throw ContractError("non-binary label in dataset");
        for (double v : s.x) {
            if (!std::isfinite(v)) throw ContractError("non-finite observation in dataset");
        }
        seen[static_cast<size_t>(s.group)] = 1;
    }
    for (int k = 0; k < group_count; ++k) {
        if (!seen[static_cast<size_t>(k)]) {
            throw ContractError("group " + std::to_string(k) + " has no samples");
        }
    }
}

DatasetSplits split(const GroupedDataset& ds, const SplitFractions& fr, Rng& rng) {
    if (fr.train <= 0.0 || fr.val <= 0.0 || fr.test <= 0.0) {
        throw ContractError("split fractions must all be positive");
    }
    if (std::fabs(fr.train + fr.val + fr.test - 1.0) > 1e-9) {
        throw ContractError("split fractions must sum to 1, got " +
                            std::to_string(fr.train + fr.val + fr.test));
    }

    // Bucket indices by (group, class) so each cell is spread over all splits.
    std::map<std::pair<int, int>, std::vector<int>> cells;
    for (size_t i = 0; i < ds.samples.size(); ++i) {
        cells[{ds.samples[i].group, ds.samples[i].y}].push_back(static_cast<int>(i));
    }

    DatasetSplits out;
    for (GroupedDataset* part : {&out.train, &out.val, &out.test}) {
        part->group_count = ds.group_count;
        part->class_set = ds.class_set;
    }
    out.train.split_tag = "train";
    out.val.split_tag = "val";
    out.test.split_tag = "test";

    for (auto& [cell, idx] : cells) {
        if (idx.size() < 3) {
            throw ContractError("split: cell (group=" + std::to_string(cell.first) +
                                ", class=" + std::to_string(cell.second) + ") has only " +
                                std::to_string(idx.size()) + " samples; need at least 3");
        }
        // Shuffle within the cell, then cut. Each split gets at least one.
        for (size_t i = idx.size(); i > 1; --i) {
            std::swap(idx[i - 1], idx[static_cast<size_t>(rng.uniform_int(static_cast<int>(i)))]);
        }
        const size_t n = idx.size();
        size_t n_train = static_cast<size_t>(std::llround(fr.train * static_cast<double>(n)));
        size_t n_val = static_cast<size_t>(std::llround(fr.val * static_cast<double>(n)));
        n_train = std::min(n_train, n - 2);
        n_train = std::max<size_t>(n_train, 1);
        n_val = std::min(n_val, n - n_train - 1);
        n_val = std::max<size_t>(n_val, 1);
        for (size_t i = 0; i < n; ++i) {
            const Sample& s = ds.samples[static_cast<size_t>(idx[i])];
            if (i < n_train) {
                out.train.samples.push_back(s);
            } else if (i < n_train + n_val) {
                out.val.samples.push_back(s);
            } else {
                out.test.samples.push_back(s);
            }
        }
    }
    return out;
}

namespace {

void append_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, size_t line_no, const std::string& col) {
    size_t pos = 0;
    double v;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ", column " + col +
                         ": not a number: '" + s + "'");
    }
    if (pos != s.size()) {
        throw ParseError("line " + std::to_string(line_no) + ", column " + col +
                         ": trailing characters in '" + s + "'");
    }
    return v;
}

int parse_int(const std::string& s, size_t line_no, const std::string& col) {
    const double v = parse_double(s, line_no, col);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) {
        throw ParseError("line " + std::to_string(line_no) + ", column " + col +
                         ": expected integer, got '" + s + "'");
    }
    return i;
}

}  // namespace

void save_csv(const GroupedDataset& ds, const std::string& path) {
    if (ds.samples.empty()) throw ContractError("refusing to save an empty dataset");
    const int d = ds.dim();
    const int nc = static_cast<int>(ds.samples[0].gt_content.size());
    const int ns = static_cast<int>(ds.samples[0].gt_style.size());

    std::string out;
    for (int j = 0; j < d; ++j) out += "x" + std::to_string(j) + ",";
    out += "y,group";
    for (int j = 0; j < nc; ++j) out += ",c" + std::to_string(j);
    for (int j = 0; j < ns; ++j) out += ",s" + std::to_string(j);
    out += "\n";

    for (const Sample& s : ds.samples) {
        for (int j = 0; j < d; ++j) {
            append_double(out, s.x[static_cast<size_t>(j)]);
            out += ',';
        }
        out += std::to_string(s.y) + "," + std::to_string(s.group);
        for (int j = 0; j < nc; ++j) {
            out += ',';
            append_double(out, s.gt_content[static_cast<size_t>(j)]);
        }
        for (int j = 0; j < ns; ++j) {
            out += ',';
            append_double(out, s.gt_style[static_cast<size_t>(j)]);
        }
        out += '\n';
    }

    std::ofstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot open for writing: " + path);
    f << out;
    if (!f) throw ParseError("write failed: " + path);
}

GroupedDataset load_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw MissingArtifactError("cannot open dataset file: " + path);

    std::string header;
    if (!std::getline(f, header)) throw ParseError(path + ": empty file");
    const std::vector<std::string> cols = split_line(header);

    // Header must be x0..x{D-1},y,group then optional c0.. and s0.., in order.
    int d = 0;
    size_t i = 0;
    while (i < cols.size() && cols[i] == "x" + std::to_string(d)) {
        ++d;
        ++i;
    }
    if (d == 0) throw ParseError(path + ": header must start with column 'x0'");
    if (i >= cols.size() || cols[i] != "y") {
        throw ParseError(path + ": expected column 'y' after x columns, found '" +
                         (i < cols.size() ? cols[i] : "<end>") + "'");
    }
    ++i;
    if (i >= cols.size() || cols[i] != "group") {
        throw ParseError(path + ": expected column 'group' after 'y', found '" +
                         (i < cols.size() ? cols[i] : "<end>") + "'");
    }
    ++i;
    int nc = 0;
    while (i < cols.size() && cols[i] == "c" + std::to_string(nc)) {
        ++nc;
        ++i;
    }
    int ns = 0;
    while (i < cols.size() && cols[i] == "s" + std::to_string(ns)) {
        ++ns;
        ++i;
    }
    if (i != cols.size()) {
        throw ParseError(path + ": unknown column '" + cols[i] + "' in header");
    }
    const size_t expected_fields = static_cast<size_t>(d) + 2 + static_cast<size_t>(nc) +
                                   static_cast<size_t>(ns);

    GroupedDataset ds;
    std::string line;
    size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> fields = split_line(line);
        if (fields.size() != expected_fields) {
            throw ParseError(path + ": line " + std::to_string(line_no) + ": expected " +
                             std::to_string(expected_fields) + " fields, got " +
                             std::to_string(fields.size()));
        }
        Sample s;
        size_t fi = 0;
        s.x.resize(static_cast<size_t>(d));
        for (int j = 0; j < d; ++j, ++fi) {
            s.x[static_cast<size_t>(j)] = parse_double(fields[fi], line_no, "x" + std::to_string(j));
        }
        s.y = parse_int(fields[fi++], line_no, "y");
        if (s.y != 0 && s.y != 1) {
            throw ParseError(path + ": line " + std::to_string(line_no) +
                             ": label must be 0 or 1, got " + std::to_string(s.y));
        }
        s.group = parse_int(fields[fi++], line_no, "group");
        if (s.group < 0) {
            throw ParseError(path + ": line " + std::to_string(line_no) + ": negative group id");
        }
        s.gt_content.resize(static_cast<size_t>(nc));
        for (int j = 0; j < nc; ++j, ++fi) {
            s.gt_content[static_cast<size_t>(j)] =
                parse_double(fields[fi], line_no, "c" + std::to_string(j));
        }
        s.gt_style.resize(static_cast<size_t>(ns));
        for (int j = 0; j < ns; ++j, ++fi) {
            s.gt_style[static_cast<size_t>(j)] =
                parse_double(fields[fi], line_no, "s" + std::to_string(j));
        }
        ds.samples.push_back(std::move(s));
    }
    if (ds.samples.empty()) throw ParseError(path + ": no data rows");
    int kmax = 0;
    for (const Sample& s : ds.samples) kmax = std::max(kmax, s.group);
    ds.group_count = kmax + 1;
    return ds;
}

}  // namespace groupinv
