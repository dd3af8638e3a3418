#include "sustain/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "sustain/error.hpp"

namespace sustain::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<char, 8> kTensorMagic{'S', 'U', 'S', 'T', 'N', 'S', 'R', '\0'};
constexpr std::array<char, 8> kModelMagic{'S', 'U', 'S', 'M', 'O', 'D', 'L', '\0'};

// Shortest decimal form that parses back to the same double.
std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

bool parse_u64(std::string_view s, std::uint64_t& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_i64(std::string_view s, std::int64_t& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + path.string());
    return data;
}

void write_bytes(const fs::path& path, const std::string& data) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

// Little-endian fixed-width binary encoding.
class Writer {
public:
    template <typename T>
    void put(T v) {
        static_assert(std::is_trivially_copyable_v<T>);
        std::array<char, sizeof(T)> raw{};
        std::memcpy(raw.data(), &v, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
        buf_.append(raw.data(), raw.size());
    }
    void bytes(const char* p, std::size_t n) { buf_.append(p, n); }
    [[nodiscard]] const std::string& str() const { return buf_; }

private:
    std::string buf_;
};

class Reader {
public:
    Reader(const std::string& data, std::string source) : data_(data), source_(std::move(source)) {}

    template <typename T>
    T get() {
        need(sizeof(T));
        std::array<char, sizeof(T)> raw{};
        std::memcpy(raw.data(), data_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
        pos_ += sizeof(T);
        T v;
        std::memcpy(&v, raw.data(), sizeof(T));
        return v;
    }
    void skip(std::size_t n) {
        need(n);
        pos_ += n;
    }
    [[nodiscard]] bool at_end() const { return pos_ == data_.size(); }
    [[nodiscard]] std::size_t remaining() const { return data_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) throw IoError(source_ + ": truncated binary file");
    }
    const std::string& data_;
    std::string source_;
    std::size_t pos_ = 0;
};

bool has_magic(const std::string& data, const std::array<char, 8>& magic) {
    return data.size() >= magic.size() && std::equal(magic.begin(), magic.end(), data.begin());
}

SparseTensor decode_tensor(const std::string& data, const std::string& source) {
    Reader r(data, source);
    r.skip(kTensorMagic.size());
    const auto version = r.get<std::uint32_t>();
    if (version != kFormatVersion) {
        throw IoError(source + ": unsupported tensor format version " + std::to_string(version));
    }
    const auto order = r.get<std::uint64_t>();
    if (order < 2 || order > 64) throw IoError(source + ": invalid tensor order");
    std::vector<std::size_t> dims(order);
    for (auto& d : dims) d = r.get<std::uint64_t>();
    const auto nnz = r.get<std::uint64_t>();
    if (nnz > r.remaining() / (order * sizeof(Index) + sizeof(double))) throw IoError(source + ": truncated binary file");
    std::vector<Index> coords(nnz * order);
    for (auto& c : coords) c = r.get<Index>();
    std::vector<double> values(nnz);
    for (auto& v : values) v = r.get<double>();
    if (!r.at_end()) throw IoError(source + ": trailing bytes after tensor payload");
    try {
        return SparseTensor::assemble(std::move(dims), coords, values);
    } catch (const Error& e) {
        throw IoError(source + ": " + e.what());
    }
}

std::string encode_tensor(const SparseTensor& t) {
    Writer w;
    w.bytes(kTensorMagic.data(), kTensorMagic.size());
    w.put<std::uint32_t>(kFormatVersion);
    w.put<std::uint64_t>(t.order());
    for (std::size_t d : t.dims()) w.put<std::uint64_t>(d);
    w.put<std::uint64_t>(t.nnz());
    for (Index c : t.coords()) w.put<Index>(c);
    for (double v : t.values()) w.put<double>(v);
    return w.str();
}

} // namespace

SparseTensor parse_tensor(const std::string& text, const std::string& source) {
    std::optional<std::vector<std::size_t>> header_dims;
    std::size_t order = 0;
    std::vector<Index> coords;
    std::vector<double> values;
    std::vector<std::size_t> max_index;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string_view line(text.data() + pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        line = trim(line);
        if (line.empty()) {
            if (eol == text.size()) break;
            continue;
        }
        if (line.front() == '#') {
            std::string_view body = trim(line.substr(1));
            if (body.rfind("dims:", 0) == 0) {
                std::vector<std::size_t> dims;
                for (auto tok : split_ws(body.substr(5))) {
                    std::uint64_t d = 0;
                    if (!parse_u64(tok, d) || d == 0 || d > std::numeric_limits<Index>::max()) {
                        throw ParseError(source, line_no, "invalid dims header entry '" + std::string(tok) + "'");
                    }
                    dims.push_back(d);
                }
                if (dims.size() < 2) throw ParseError(source, line_no, "dims header needs at least two modes");
                if (header_dims || order != 0) throw ParseError(source, line_no, "dims header must precede entries and appear once");
                header_dims = std::move(dims);
            }
            if (eol == text.size()) break;
            continue;
        }
        const auto tokens = split_ws(line);
        if (order == 0) {
            if (tokens.size() < 3) throw ParseError(source, line_no, "expected at least two indices and a value");
            order = tokens.size() - 1;
            if (header_dims && header_dims->size() != order) {
                throw ParseError(source, line_no, "entry order disagrees with the dims header");
            }
            max_index.assign(order, 0);
        } else if (tokens.size() != order + 1) {
            throw ParseError(source, line_no,
                             "expected " + std::to_string(order + 1) + " fields, found " + std::to_string(tokens.size()));
        }
        for (std::size_t m = 0; m < order; ++m) {
            std::uint64_t idx = 0;
            if (!parse_u64(tokens[m], idx)) {
                std::int64_t signed_idx = 0;
                if (parse_i64(tokens[m], signed_idx)) throw ParseError(source, line_no, "index < 1");
                throw ParseError(source, line_no, "malformed index '" + std::string(tokens[m]) + "'");
            }
            if (idx < 1) throw ParseError(source, line_no, "index < 1");
            if (idx > std::numeric_limits<Index>::max()) throw ParseError(source, line_no, "index too large");
            if (header_dims && idx > (*header_dims)[m]) {
                throw ParseError(source, line_no, "index exceeds the dims header");
            }
            coords.push_back(static_cast<Index>(idx - 1));
            max_index[m] = std::max<std::size_t>(max_index[m], idx);
        }
        double v = 0.0;
        if (!parse_double(tokens[order], v)) {
            throw ParseError(source, line_no, "malformed value '" + std::string(tokens[order]) + "'");
        }
        if (!std::isfinite(v)) throw ParseError(source, line_no, "non-finite value");
        if (v < 0.0) throw ParseError(source, line_no, "negative value");
        values.push_back(v);
        if (eol == text.size()) break;
    }
    if (!header_dims && order == 0) throw IoError(source + ": no entries and no dims header");
    std::vector<std::size_t> dims = header_dims ? *header_dims : max_index;
    return SparseTensor::assemble(std::move(dims), coords, values);
}

std::string format_tensor(const SparseTensor& t) {
    std::string out = "# dims:";
    for (std::size_t d : t.dims()) out += " " + std::to_string(d);
    out += '\n';
    for (std::size_t e = 0; e < t.nnz(); ++e) {
        for (Index i : t.index(e)) {
            out += std::to_string(static_cast<std::uint64_t>(i) + 1);
            out += ' ';
        }
        out += format_double(t.value(e));
        out += '\n';
    }
    return out;
}

SparseTensor load_tensor(const fs::path& path) {
    if (!fs::exists(path)) throw IoError("input not found: " + path.string());
    const std::string data = read_bytes(path);
    if (has_magic(data, kTensorMagic)) return decode_tensor(data, path.string());
    return parse_tensor(data, path.string());
}

void save_tensor(const fs::path& path, const SparseTensor& t, FileFormat format) {
    write_bytes(path, format == FileFormat::binary ? encode_tensor(t) : format_tensor(t));
}

// ---------------------------------------------------------------------------

namespace {

std::string join_sizes(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[i]);
    }
    return out;
}

std::string format_factor(const DenseMatrix& f) {
    std::string out;
    for (std::size_t i = 0; i < f.rows(); ++i) {
        for (std::size_t r = 0; r < f.cols(); ++r) {
            if (r) out += ' ';
            out += std::to_string(static_cast<long long>(f(i, r)));
        }
        out += '\n';
    }
    return out;
}

DenseMatrix parse_factor(const std::string& text, const std::string& source, std::size_t rows, std::size_t cols) {
    DenseMatrix f(rows, cols);
    std::istringstream in(text);
    std::string line;
    std::size_t i = 0;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto tokens = split_ws(line);
        if (i >= rows) throw ParseError(source, line_no, "more rows than the header declares");
        if (tokens.size() != cols) throw ParseError(source, line_no, "expected " + std::to_string(cols) + " entries");
        for (std::size_t r = 0; r < cols; ++r) {
            std::int64_t v = 0;
            if (!parse_i64(tokens[r], v)) throw ParseError(source, line_no, "non-integer factor entry");
            f(i, r) = static_cast<double>(v);
        }
        ++i;
    }
    if (i != rows) throw IoError(source + ": expected " + std::to_string(rows) + " rows, found " + std::to_string(i));
    return f;
}

std::vector<std::size_t> parse_size_list(std::string_view s, const std::string& source) {
    std::vector<std::size_t> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t comma = s.find(',', start);
        if (comma == std::string_view::npos) comma = s.size();
        std::uint64_t v = 0;
        if (!parse_u64(trim(s.substr(start, comma - start)), v)) throw IoError(source + ": malformed dims list");
        out.push_back(v);
        start = comma + 1;
    }
    return out;
}

void validate_loaded(const LoadedModel& lm, const std::string& source) {
    try {
        lm.model.check_invariants();
    } catch (const InvariantError& e) {
        throw IoError(source + ": " + e.what());
    }
    if (lm.model.dims() != lm.metadata.dims || lm.model.rank() != lm.metadata.rank || lm.model.tau != lm.metadata.tau) {
        throw IoError(source + ": header disagrees with the stored factors");
    }
}

LoadedModel load_text_model(const fs::path& dir) {
    const fs::path meta_path = dir / "model.meta";
    const std::string meta_text = read_bytes(meta_path);
    std::map<std::string, std::string> kv;
    std::istringstream in(meta_text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view l = trim(line);
        if (l.empty() || l.front() == '#') continue;
        const auto eq = l.find('=');
        if (eq == std::string_view::npos) throw ParseError(meta_path.string(), line_no, "expected key=value");
        kv[std::string(trim(l.substr(0, eq)))] = std::string(trim(l.substr(eq + 1)));
    }
    auto require = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw IoError(meta_path.string() + ": missing key '" + key + "'");
        return it->second;
    };
    LoadedModel lm;
    std::int64_t version = 0;
    if (!parse_i64(require("format_version"), version) || version != kFormatVersion) {
        throw IoError(meta_path.string() + ": unsupported format version");
    }
    lm.metadata.dims = parse_size_list(require("dims"), meta_path.string());
    std::uint64_t rank = 0;
    std::int64_t tau = 0;
    if (!parse_u64(require("rank"), rank)) throw IoError(meta_path.string() + ": malformed rank");
    if (!parse_i64(require("tau"), tau) || tau < 1 || tau > std::numeric_limits<int>::max()) {
        throw IoError(meta_path.string() + ": malformed tau");
    }
    lm.metadata.rank = rank;
    lm.metadata.tau = static_cast<int>(tau);
    if (auto it = kv.find("seed"); it != kv.end()) {
        std::uint64_t seed = 0;
        if (!parse_u64(it->second, seed)) throw IoError(meta_path.string() + ": malformed seed");
        lm.metadata.seed = seed;
    }
    if (auto it = kv.find("fit"); it != kv.end()) {
        double f = 0.0;
        if (!parse_double(it->second, f)) throw IoError(meta_path.string() + ": malformed fit");
        lm.metadata.fit = f;
    }

    lm.model.tau = lm.metadata.tau;
    for (std::size_t n = 0; n < lm.metadata.dims.size(); ++n) {
        const fs::path p = dir / ("factor_" + std::to_string(n + 1) + ".txt");
        lm.model.factors.push_back(parse_factor(read_bytes(p), p.string(), lm.metadata.dims[n], rank));
    }
    const fs::path lp = dir / "lambda.txt";
    std::istringstream lin(read_bytes(lp));
    line_no = 0;
    while (std::getline(lin, line)) {
        ++line_no;
        std::string_view l = trim(line);
        if (l.empty()) continue;
        std::int64_t v = 0;
        if (!parse_i64(l, v)) throw ParseError(lp.string(), line_no, "non-integer weight");
        lm.model.lambda.push_back(v);
    }
    validate_loaded(lm, dir.string());
    return lm;
}

LoadedModel load_binary_model(const fs::path& path) {
    const std::string data = read_bytes(path);
    const std::string source = path.string();
    if (!has_magic(data, kModelMagic)) throw IoError(source + ": not a model file");
    Reader r(data, source);
    r.skip(kModelMagic.size());
    LoadedModel lm;
    const auto version = r.get<std::uint32_t>();
    if (version != kFormatVersion) throw IoError(source + ": unsupported format version");
    const auto order = r.get<std::uint64_t>();
    const auto rank = r.get<std::uint64_t>();
    const auto tau = r.get<std::int32_t>();
    if (order < 2 || order > 64 || tau < 1) throw IoError(source + ": invalid header");
    lm.metadata.rank = rank;
    lm.metadata.tau = tau;
    if (r.get<std::uint8_t>()) lm.metadata.seed = r.get<std::uint64_t>();
    if (r.get<std::uint8_t>()) lm.metadata.fit = r.get<double>();
    for (std::uint64_t n = 0; n < order; ++n) lm.metadata.dims.push_back(r.get<std::uint64_t>());
    lm.model.tau = tau;
    for (std::size_t rows : lm.metadata.dims) {
        if (rank != 0 && rows > r.remaining() / (rank * sizeof(std::int32_t))) throw IoError(source + ": truncated binary file");
        DenseMatrix f(rows, rank);
        for (double& v : f.values()) v = r.get<std::int32_t>();
        lm.model.factors.push_back(std::move(f));
    }
    if (rank > r.remaining() / sizeof(std::int64_t)) throw IoError(source + ": truncated binary file");
    lm.model.lambda.resize(rank);
    for (auto& l : lm.model.lambda) l = r.get<std::int64_t>();
    if (!r.at_end()) throw IoError(source + ": trailing bytes after model payload");
    validate_loaded(lm, source);
    return lm;
}

} // namespace

void save_model(const fs::path& dir, const IntegerFactorModel& model, std::optional<std::uint64_t> seed,
                std::optional<double> fit, FileFormat format) {
    model.check_invariants();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());

    if (format == FileFormat::binary) {
        Writer w;
        w.bytes(kModelMagic.data(), kModelMagic.size());
        w.put<std::uint32_t>(kFormatVersion);
        w.put<std::uint64_t>(model.order());
        w.put<std::uint64_t>(model.rank());
        w.put<std::int32_t>(model.tau);
        w.put<std::uint8_t>(seed.has_value());
        if (seed) w.put<std::uint64_t>(*seed);
        w.put<std::uint8_t>(fit.has_value());
        if (fit) w.put<double>(*fit);
        for (std::size_t d : model.dims()) w.put<std::uint64_t>(d);
        for (const auto& f : model.factors) {
            for (double v : f.values()) w.put<std::int32_t>(static_cast<std::int32_t>(v));
        }
        for (std::int64_t l : model.lambda) w.put<std::int64_t>(l);
        write_bytes(dir / "model.bin", w.str());
        return;
    }

    for (std::size_t n = 0; n < model.order(); ++n) {
        write_bytes(dir / ("factor_" + std::to_string(n + 1) + ".txt"), format_factor(model.factors[n]));
    }
    std::string lam;
    for (std::int64_t l : model.lambda) lam += std::to_string(l) + '\n';
    write_bytes(dir / "lambda.txt", lam);

    std::string meta = "format_version=" + std::to_string(kFormatVersion) + '\n';
    meta += "order=" + std::to_string(model.order()) + '\n';
    meta += "dims=" + join_sizes(model.dims()) + '\n';
    meta += "rank=" + std::to_string(model.rank()) + '\n';
    meta += "tau=" + std::to_string(model.tau) + '\n';
    if (seed) meta += "seed=" + std::to_string(*seed) + '\n';
    if (fit) meta += "fit=" + format_double(*fit) + '\n';
    write_bytes(dir / "model.meta", meta);
}

LoadedModel load_model(const fs::path& dir) {
    if (fs::is_regular_file(dir)) return load_binary_model(dir);
    if (fs::exists(dir / "model.bin")) return load_binary_model(dir / "model.bin");
    if (fs::exists(dir / "model.meta")) return load_text_model(dir);
    throw IoError("no model found in " + dir.string());
}

// ---------------------------------------------------------------------------

std::string format_trace_csv(const SolverTrace& trace) {
    std::string out = "sweep,objective,fit,seconds,zero_lock_repairs\n";
    for (std::size_t s = 0; s < trace.objective.size(); ++s) {
        out += std::to_string(s);
        out += ',' + format_double(trace.objective[s]);
        out += ',' + format_double(s < trace.fit.size() ? trace.fit[s] : 0.0);
        out += ',' + format_double(s < trace.seconds.size() ? trace.seconds[s] : 0.0);
        out += ',' + std::to_string(s < trace.zero_lock_repairs.size() ? trace.zero_lock_repairs[s] : 0);
        out += '\n';
    }
    return out;
}

void write_trace_csv(const fs::path& path, const SolverTrace& trace) { write_bytes(path, format_trace_csv(trace)); }

std::string stability_report_json(const StabilityReport& report) {
    auto number = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json j;
    j["format_version"] = kFormatVersion;
    j["repetitions"] = report.repetitions;
    j["assess_mode"] = report.assess_mode;
    j["selected_rank"] = report.selected_rank;
    j["best_repetition"] = report.best_repetition;
    j["best_fit"] = number(report.best_fit);
    j["ranks"] = json::array();
    for (const RankStability& rs : report.per_rank) {
        json r;
        r["rank"] = rs.rank;
        r["score"] = number(rs.score);
        r["pairs"] = json::array();
        for (const auto& p : rs.pairs) r["pairs"].push_back({{"first", p.first}, {"second", p.second}, {"diss", number(p.diss)}});
        r["runs"] = json::array();
        for (const auto& run : rs.runs) {
            r["runs"].push_back({{"repetition", run.repetition},
                                 {"seed", run.seed},
                                 {"fit", number(run.fit)},
                                 {"degenerate", run.degenerate}});
        }
        j["ranks"].push_back(std::move(r));
    }
    j["warnings"] = report.warnings;
    return j.dump(2) + '\n';
}

void write_stability_report(const fs::path& path, const StabilityReport& report) {
    write_bytes(path, stability_report_json(report));
}

std::vector<std::string> load_feature_names(const fs::path& path) {
    std::istringstream in(read_bytes(path));
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) names.emplace_back(trim(line));
    return names;
}

std::string format_score_table(const IntegerFactorModel& model, std::size_t mode, const std::vector<std::string>& names) {
    if (mode >= model.order()) throw DimensionError("format_score_table: mode out of range");
    const DenseMatrix& f = model.factors[mode];
    const DenseMatrix& rows = model.factors.front();
    std::ostringstream out;
    for (std::size_t k = 0; k < model.rank(); ++k) {
        std::size_t members = 0;
        for (std::size_t i = 0; i < rows.rows(); ++i) members += rows(i, k) != 0.0;
        const double prevalence = rows.rows() ? 100.0 * static_cast<double>(members) / static_cast<double>(rows.rows()) : 0.0;
        char head[128];
        std::snprintf(head, sizeof head, "Component %zu  lambda=%lld  prevalence=%.1f%%\n", k + 1,
                      static_cast<long long>(model.lambda[k]), prevalence);
        out << head;
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < f.rows(); ++i) {
            if (f(i, k) != 0.0) idx.push_back(i);
        }
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return f(a, k) > f(b, k); });
        for (std::size_t i : idx) {
            const std::string name =
                i < names.size() && !names[i].empty() ? names[i] : "feature_" + std::to_string(i + 1);
            out << "  " << static_cast<long long>(f(i, k)) << "  " << name << '\n';
        }
        out << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------

void write_manifest(const fs::path& path, const RunManifest& manifest) {
    json j;
    j["format_version"] = manifest.format_version;
    j["command"] = manifest.command;
    j["input"] = manifest.input;
    j["output"] = manifest.output;
    j["arguments"] = manifest.arguments;
    write_bytes(path, j.dump(2) + '\n');
}

RunManifest read_manifest(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_bytes(path));
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    RunManifest m;
    try {
        m.format_version = j.at("format_version").get<int>();
        m.command = j.at("command").get<std::string>();
        m.input = j.value("input", std::string());
        m.output = j.value("output", std::string());
        m.arguments = j.value("arguments", std::vector<std::string>());
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    if (m.format_version != kFormatVersion) {
        throw IoError(path.string() + ": manifest format version " + std::to_string(m.format_version) +
                      " is not supported");
    }
    if (!m.input.empty() && !fs::exists(m.input)) throw IoError(path.string() + ": input not found: " + m.input);
    return m;
}

void write_text_file(const fs::path& path, const std::string& contents) { write_bytes(path, contents); }

std::string read_text_file(const fs::path& path) { return read_bytes(path); }

} // namespace sustain::io
