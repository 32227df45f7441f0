#include "perihom/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace perihom {

namespace {

void require_stream(const std::ofstream& os, const std::string& path) {
    if (!os) throw Error("cannot open " + path + " for writing");
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

}  // namespace

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void write_field_binary(const std::string& path, const std::vector<ScalarField>& components) {
    if (components.empty()) throw ConfigError("write_field_binary: no components");
    const TorusGrid& g = components.front().grid();
    for (const auto& c : components)
        if (c.grid() != g) throw ConfigError("write_field_binary: mismatched grids");

    std::ofstream os(path, std::ios::binary);
    require_stream(os, path);
    os << "PHFLD1 d=" << g.dim() << " n=" << g.describe()
       << " components=" << components.size() << "\n";
    for (const auto& c : components) {
        const RealArray& v = c.values();
        os.write(reinterpret_cast<const char*>(v.data()),
                 static_cast<std::streamsize>(v.size() * sizeof(double)));
    }
}

void write_field_csv(const std::string& path, const std::vector<ScalarField>& components,
                     const std::vector<std::string>& names) {
    if (components.empty()) throw ConfigError("write_field_csv: no components");
    if (names.size() != components.size())
        throw ConfigError("write_field_csv: one name per component");
    const TorusGrid& g = components.front().grid();

    std::vector<std::string> header;
    for (int a = 0; a < g.dim(); ++a) header.push_back("y" + std::to_string(a + 1));
    for (const auto& n : names) header.push_back(n);

    std::vector<std::vector<std::string>> rows;
    rows.reserve(static_cast<std::size_t>(g.node_count()));
    for (std::int64_t idx = 0; idx < g.node_count(); ++idx) {
        const auto k = g.unflatten(idx);
        std::vector<std::string> row;
        for (int a = 0; a < g.dim(); ++a) row.push_back(format_double(g.coord(k[a], a)));
        for (const auto& c : components) row.push_back(format_double(c[idx]));
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

std::vector<ScalarField> read_field_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path);
    std::string header;
    std::getline(is, header);
    int d = 0, comps = 0;
    std::array<int, 3> n{1, 1, 1};
    {
        std::istringstream hs(header);
        std::string magic, tok;
        hs >> magic;
        if (magic != "PHFLD1") throw Error(path + ": not a PHFLD1 field file");
        while (hs >> tok) {
            if (tok.rfind("d=", 0) == 0) d = std::atoi(tok.c_str() + 2);
            else if (tok.rfind("n=", 0) == 0) {
                std::string dims = tok.substr(2);
                int axis = 0;
                std::size_t pos = 0;
                while (axis < 3 && pos <= dims.size()) {
                    std::size_t next = dims.find('x', pos);
                    if (next == std::string::npos) next = dims.size();
                    n[axis++] = std::atoi(dims.substr(pos, next - pos).c_str());
                    pos = next + 1;
                }
            } else if (tok.rfind("components=", 0) == 0)
                comps = std::atoi(tok.c_str() + 11);
        }
    }
    if (d < 1 || d > 3 || comps < 1) throw Error(path + ": malformed field header");
    TorusGrid grid(d, n);
    std::vector<ScalarField> out;
    for (int c = 0; c < comps; ++c) {
        RealArray v(grid.node_count());
        is.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(v.size() * sizeof(double)));
        if (!is) throw Error(path + ": truncated field data");
        out.emplace_back(grid, std::move(v));
    }
    return out;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream os(path, std::ios::binary);  // binary keeps the CRLF exact
    require_stream(os, path);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) os << ',';
        os << csv_escape(header[i]);
    }
    os << "\r\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ',';
            os << csv_escape(row[i]);
        }
        os << "\r\n";
    }
}

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream os(path, std::ios::binary);
    require_stream(os, path);
    os << j.dump(2) << "\n";
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

}  // namespace perihom
