#include "sbpsat/triplet_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "sbpsat/errors.hpp"

namespace sbpsat {

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    return in;
}

}  // namespace

std::string format_real(double value)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_triplets(std::ostream& out, const SpMat& matrix)
{
    out << matrix.rows() << ' ' << matrix.cols() << ' ' << matrix.nonZeros() << '\n';
    // row-major order so files read naturally and compare line by line
    const Eigen::SparseMatrix<double, Eigen::RowMajor> rows = matrix;
    for (Eigen::Index i = 0; i < rows.outerSize(); ++i)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rows, i); it; ++it)
            out << it.row() << ' ' << it.col() << ' ' << format_real(it.value()) << '\n';
}

void write_triplets(const std::filesystem::path& path, const SpMat& matrix)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    write_triplets(out, matrix);
}

SpMat read_triplets(std::istream& in, const std::string& origin)
{
    long rows = 0;
    long cols = 0;
    long nnz = 0;
    if (!(in >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0)
        throw InvariantError(origin + ": malformed triplet header");
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(nnz));
    for (long k = 0; k < nnz; ++k) {
        long i = 0;
        long j = 0;
        double value = 0.0;
        if (!(in >> i >> j >> value))
            throw InvariantError(origin + ": truncated triplet list");
        if (i < 0 || i >= rows || j < 0 || j >= cols)
            throw InvariantError(origin + ": triplet index out of range");
        entries.emplace_back(static_cast<int>(i), static_cast<int>(j), value);
    }
    SpMat matrix(rows, cols);
    matrix.setFromTriplets(entries.begin(), entries.end());
    return matrix;
}

SpMat read_triplets(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return read_triplets(in, path.string());
}

KeyValues parse_key_values(std::istream& in, const std::string& origin)
{
    KeyValues values;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(body.substr(0, eq));
        if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        values[key] = trim(body.substr(eq + 1));
    }
    return values;
}

KeyValues read_key_values(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return parse_key_values(in, path.string());
}

void write_key_values(const std::filesystem::path& path, const KeyValues& values)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    for (const auto& [key, value] : values) out << key << '=' << value << '\n';
}

std::uint64_t fnv1a64(const std::string& bytes)
{
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::uint64_t file_checksum(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return fnv1a64(buf.str());
}

std::string format_checksum(std::uint64_t value)
{
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::map<std::string, std::string> read_manifest(const std::filesystem::path& path)
{
    auto in = open_input(path);
    std::map<std::string, std::string> entries;
    std::string name;
    std::string sum;
    while (in >> name >> sum) entries[name] = sum;
    return entries;
}

}  // namespace sbpsat
