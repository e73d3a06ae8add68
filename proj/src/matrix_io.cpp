#include "spod/matrix_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spod/errors.hpp"

namespace spod::io {

namespace {

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint64_t get_u64(std::string_view bytes, std::size_t offset) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
    return v;
}

double parse_double(const std::string& token, const std::filesystem::path& path, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(token, &used);
        if (token.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(token);
        return v;
    } catch (const std::exception&) {
        throw IoError(path.string() + ":" + std::to_string(line) + ": cannot parse number '" + token + "'");
    }
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::string format_exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string encode_matrix(const Matrix& m) {
    std::string out;
    out.reserve(kMatrixHeaderBytes + 8 * static_cast<std::size_t>(m.size()));
    out.append(kMatrixMagic);
    out.push_back(kDtypeFloat64);
    put_u64(out, static_cast<std::uint64_t>(m.rows()));
    put_u64(out, static_cast<std::uint64_t>(m.cols()));
    out.push_back(kLayoutColumnMajor);
    // Eigen's default storage is column-major, so data() is already in file order.
    for (Eigen::Index i = 0; i < m.size(); ++i) put_u64(out, std::bit_cast<std::uint64_t>(m.data()[i]));
    return out;
}

Matrix decode_matrix(std::string_view bytes) {
    if (bytes.size() < kMatrixHeaderBytes || bytes.substr(0, kMatrixMagic.size()) != kMatrixMagic)
        throw IoError("matrix file: missing SPODM1 header");
    if (bytes[6] != kDtypeFloat64) throw IoError("matrix file: unsupported dtype tag");
    if (bytes[23] != kLayoutColumnMajor) throw IoError("matrix file: unsupported layout tag");
    const std::uint64_t rows = get_u64(bytes, 7);
    const std::uint64_t cols = get_u64(bytes, 15);
    const std::uint64_t payload = bytes.size() - kMatrixHeaderBytes;
    if (rows != 0 && cols > (payload / 8) / rows)
        throw IoError("matrix file: payload shorter than " + std::to_string(rows) + "x" + std::to_string(cols));
    if (payload != 8 * rows * cols)
        throw IoError("matrix file: payload is " + std::to_string(payload) + " bytes, expected " +
                      std::to_string(8 * rows * cols));
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.size(); ++i)
        m.data()[i] = std::bit_cast<double>(get_u64(bytes, kMatrixHeaderBytes + 8 * static_cast<std::size_t>(i)));
    return m;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error while reading " + path.string());
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) throw IoError("error while writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move " + tmp.string() + " to " + path.string());
    }
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) { write_file_atomic(path, encode_matrix(m)); }

Matrix read_matrix(const std::filesystem::path& path) {
    try {
        return decode_matrix(read_file(path));
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::vector<double> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(parse_double(trim(cell), path, lineno));
        if (!rows.empty() && row.size() != rows.front().size())
            throw IoError(path.string() + ":" + std::to_string(lineno) + ": ragged row");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) return Matrix(0, 0);
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

void write_vector_text(const std::filesystem::path& path, std::span<const double> values) {
    std::string out;
    for (double v : values) {
        out += format_exact(v);
        out += '\n';
    }
    write_file_atomic(path, out);
}

std::vector<double> read_vector_text(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::vector<double> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        out.push_back(parse_double(t, path, lineno));
    }
    return out;
}

void write_key_values(const std::filesystem::path& path, const std::map<std::string, std::string>& kv) {
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    write_file_atomic(path, out);
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw IoError(path.string() + ": expected key=value, got '" + t + "'");
        kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return kv;
}

}  // namespace spod::io
