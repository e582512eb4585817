#include "corsvm/qubo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "corsvm/errors.hpp"
#include "corsvm/rng.hpp"

namespace corsvm {

namespace {

constexpr std::size_t kExhaustiveBitLimit = 26;

void validate_encoding(const EncodingSpec& enc) {
    if (enc.base < 1) throw Error("encoding: base must be >= 1");
    if (enc.bits < 1) throw Error("encoding: bits must be >= 1");
    if (enc.lambda < 0.0) throw Error("encoding: lambda must be nonnegative");
}

// FNV-1a over the raw bytes of the training data and configuration.
class Fingerprint {
public:
    void add_bytes(const void* data, std::size_t n) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            hash_ ^= bytes[i];
            hash_ *= 0x100000001b3ULL;
        }
    }
    void add(double v) { add_bytes(&v, sizeof(v)); }
    void add(std::int64_t v) { add_bytes(&v, sizeof(v)); }

    std::string hex() const {
        static const char* digits = "0123456789abcdef";
        std::string out(16, '0');
        for (int i = 0; i < 16; ++i)
            out[static_cast<std::size_t>(15 - i)] = digits[(hash_ >> (4 * i)) & 0xF];
        return out;
    }

private:
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

bool lex_less(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Steepest 1-flip descent; leaves z with no improving single flip.
void greedy_descent(const QuboProblem& q, std::vector<std::uint8_t>& z) {
    const std::size_t cap = 16 * q.dim + 64;
    for (std::size_t round = 0; round < cap; ++round) {
        double best_delta = 0.0;
        std::size_t best_bit = q.dim;
        for (std::size_t b = 0; b < q.dim; ++b) {
            const double d = flip_delta(q, z, b);
            if (d < best_delta) {
                best_delta = d;
                best_bit = b;
            }
        }
        if (best_bit == q.dim) break;
        z[best_bit] ^= 1u;
    }
}

}  // namespace

double EncodingSpec::alpha_max() const {
    if (base == 1) return static_cast<double>(bits);
    return (std::pow(static_cast<double>(base), bits) - 1.0) / (static_cast<double>(base) - 1.0);
}

void to_json(nlohmann::json& j, const EncodingSpec& e) {
    j = nlohmann::json{{"base", e.base},
                       {"bits", e.bits},
                       {"lambda", e.lambda},
                       {"weighting", e.weighting == QuboWeighting::none ? "none" : "encoded"}};
}

void from_json(const nlohmann::json& j, EncodingSpec& e) {
    e.base = j.value("base", 2);
    e.bits = j.value("bits", 3);
    e.lambda = j.value("lambda", 1.0);
    const std::string w = j.value("weighting", "none");
    if (w == "none")
        e.weighting = QuboWeighting::none;
    else if (w == "encoded")
        e.weighting = QuboWeighting::encoded;
    else
        throw ParseError("EncodingSpec: unknown weighting '" + w + "'");
    validate_encoding(e);
}

void to_json(nlohmann::json& j, const QuboProblem& p) {
    nlohmann::json triples = nlohmann::json::array();
    for (Eigen::Index r = 0; r < p.q.rows(); ++r)
        for (Eigen::Index c = r; c < p.q.cols(); ++c)
            if (p.q(r, c) != 0.0) triples.push_back({r, c, p.q(r, c)});
    j = nlohmann::json{{"dim", p.dim},
                       {"triples", std::move(triples)},
                       {"encoding", p.encoding},
                       {"provenance",
                        {{"kernel", p.kernel}, {"data_fingerprint", p.data_fingerprint}}}};
}

void from_json(const nlohmann::json& j, QuboProblem& p) {
    p.dim = j.at("dim").get<std::size_t>();
    p.q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p.dim),
                                static_cast<Eigen::Index>(p.dim));
    for (const auto& t : j.at("triples")) {
        const auto r = t.at(0).get<std::size_t>();
        const auto c = t.at(1).get<std::size_t>();
        if (r >= p.dim || c >= p.dim || c < r)
            throw ParseError("QuboProblem: triple outside the upper triangle");
        p.q(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = t.at(2).get<double>();
    }
    if (j.contains("encoding")) p.encoding = j.at("encoding").get<EncodingSpec>();
    if (j.contains("provenance")) {
        const auto& prov = j.at("provenance");
        if (prov.contains("kernel")) p.kernel = prov.at("kernel").get<KernelSpec>();
        p.data_fingerprint = prov.value("data_fingerprint", "");
    }
}

void to_json(nlohmann::json& j, const BinarySolution& s) {
    nlohmann::json bits = nlohmann::json::array();
    for (const auto b : s.z) bits.push_back(static_cast<int>(b));
    j = nlohmann::json{{"z", std::move(bits)}, {"energy", s.energy}};
}

void from_json(const nlohmann::json& j, BinarySolution& s) {
    s.z.clear();
    for (const auto& v : j.at("z")) {
        const int b = v.get<int>();
        if (b != 0 && b != 1) throw ParseError("BinarySolution: bits must be 0 or 1");
        s.z.push_back(static_cast<std::uint8_t>(b));
    }
    s.energy = j.at("energy").get<double>();
}

AnnealSchedule default_schedule(const QuboProblem& q, std::uint64_t seed) {
    AnnealSchedule sched;
    const double max_abs = q.q.size() > 0 ? q.q.cwiseAbs().maxCoeff() : 0.0;
    sched.t_start = std::max(max_abs, 1e-6);
    sched.t_end = 1e-3 * sched.t_start;
    sched.seed = seed;
    return sched;
}

double alpha_from_bits(std::span<const std::uint8_t> bits, const EncodingSpec& enc,
                       double point_weight) {
    validate_encoding(enc);
    if (bits.size() != static_cast<std::size_t>(enc.bits))
        throw DimensionError("alpha_from_bits: expected " + std::to_string(enc.bits) + " bits");
    double value = 0.0;
    double power = 1.0;
    for (int k = 0; k < enc.bits; ++k) {
        if (bits[static_cast<std::size_t>(k)]) value += power;
        power *= static_cast<double>(enc.base);
    }
    return enc.weighting == QuboWeighting::encoded ? point_weight * value : value;
}

QuboProblem build_qubo(const Eigen::MatrixXd& points, const std::vector<int>& labels,
                       const Eigen::VectorXd& weights, const KernelSpec& spec,
                       const EncodingSpec& enc) {
    validate_encoding(enc);
    const Eigen::Index m = points.rows();
    if (m < 2) throw SizeError("build_qubo: need at least 2 points");
    if (static_cast<Eigen::Index>(labels.size()) != m || weights.size() != m)
        throw DimensionError("build_qubo: labels/weights length mismatch");
    {
        bool pos = false;
        bool neg = false;
        for (const int y : labels) {
            if (y == +1)
                pos = true;
            else if (y == -1)
                neg = true;
            else
                throw Error("build_qubo: labels must be +1 or -1");
        }
        if (!pos || !neg) throw Error("build_qubo: both classes must be present");
    }

    const int bits = enc.bits;
    const std::size_t dim = static_cast<std::size_t>(m) * static_cast<std::size_t>(bits);
    const Eigen::MatrixXd gram = gram_matrix(spec, points);

    std::vector<double> power(static_cast<std::size_t>(bits));
    power[0] = 1.0;
    for (int k = 1; k < bits; ++k)
        power[static_cast<std::size_t>(k)] =
            power[static_cast<std::size_t>(k - 1)] * static_cast<double>(enc.base);

    Eigen::VectorXd scale(m);  // per-point multiplier on the encoded value
    for (Eigen::Index i = 0; i < m; ++i)
        scale(i) = enc.weighting == QuboWeighting::encoded ? weights(i) : 1.0;

    QuboProblem problem;
    problem.dim = dim;
    problem.encoding = enc;
    problem.kernel = spec;
    problem.q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                      static_cast<Eigen::Index>(dim));

    for (Eigen::Index i = 0; i < m; ++i) {
        const double yi = static_cast<double>(labels[static_cast<std::size_t>(i)]);
        for (int k = 0; k < bits; ++k) {
            const auto a = static_cast<Eigen::Index>(problem.index(static_cast<std::size_t>(i),
                                                                   static_cast<std::size_t>(k)));
            for (Eigen::Index jp = i; jp < m; ++jp) {
                const double yj = static_cast<double>(labels[static_cast<std::size_t>(jp)]);
                const int l_begin = (jp == i) ? k : 0;
                for (int l = l_begin; l < bits; ++l) {
                    const auto b = static_cast<Eigen::Index>(problem.index(
                        static_cast<std::size_t>(jp), static_cast<std::size_t>(l)));
                    const double coeff = scale(i) * scale(jp) *
                                         power[static_cast<std::size_t>(k)] *
                                         power[static_cast<std::size_t>(l)] * yi * yj *
                                         (0.5 * gram(i, jp) + enc.lambda);
                    if (a == b) {
                        problem.q(a, a) += coeff - scale(i) * power[static_cast<std::size_t>(k)];
                    } else {
                        problem.q(a, b) += 2.0 * coeff;
                    }
                }
            }
        }
    }

    Fingerprint fp;
    fp.add(static_cast<std::int64_t>(m));
    fp.add(static_cast<std::int64_t>(points.cols()));
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index c = 0; c < points.cols(); ++c) fp.add(points(i, c));
        fp.add(static_cast<std::int64_t>(labels[static_cast<std::size_t>(i)]));
        fp.add(weights(i));
    }
    fp.add(static_cast<std::int64_t>(enc.base));
    fp.add(static_cast<std::int64_t>(enc.bits));
    fp.add(enc.lambda);
    fp.add(static_cast<std::int64_t>(enc.weighting == QuboWeighting::encoded));
    fp.add(static_cast<std::int64_t>(spec.kind == KernelKind::rbf));
    fp.add(spec.kind == KernelKind::rbf ? spec.gamma : 0.0);
    problem.data_fingerprint = fp.hex();

    return problem;
}

double energy(const QuboProblem& q, std::span<const std::uint8_t> z) {
    if (z.size() != q.dim) throw DimensionError("energy: state length mismatch");
    double e = 0.0;
    for (std::size_t a = 0; a < q.dim; ++a) {
        if (!z[a]) continue;
        const auto ia = static_cast<Eigen::Index>(a);
        e += q.q(ia, ia);
        for (std::size_t b = a + 1; b < q.dim; ++b)
            if (z[b]) e += q.q(ia, static_cast<Eigen::Index>(b));
    }
    return e;
}

double flip_delta(const QuboProblem& q, std::span<const std::uint8_t> z, std::size_t b) {
    if (z.size() != q.dim) throw DimensionError("flip_delta: state length mismatch");
    if (b >= q.dim) throw LookupError("flip_delta: bit index out of range");
    const auto ib = static_cast<Eigen::Index>(b);
    double s = q.q(ib, ib);
    for (std::size_t a = 0; a < b; ++a)
        if (z[a]) s += q.q(static_cast<Eigen::Index>(a), ib);
    for (std::size_t a = b + 1; a < q.dim; ++a)
        if (z[a]) s += q.q(ib, static_cast<Eigen::Index>(a));
    return z[b] ? -s : s;
}

BinarySolution solve_exhaustive(
    const QuboProblem& q,
    const std::function<void(std::span<const std::uint8_t>, double)>& checkpoint) {
    if (q.dim > kExhaustiveBitLimit)
        throw SizeError("solve_exhaustive: " + std::to_string(q.dim) + " bits exceeds the " +
                        std::to_string(kExhaustiveBitLimit) + "-bit guard");
    if (q.dim == 0) throw SizeError("solve_exhaustive: empty problem");

    std::vector<std::uint8_t> z(q.dim, 0);
    double e = 0.0;
    std::vector<std::uint8_t> best_z = z;
    double best_e = e;
    if (checkpoint) checkpoint(z, e);

    const std::uint64_t total = 1ULL << q.dim;
    for (std::uint64_t t = 1; t < total; ++t) {
        // Reflected Gray code: state t differs from t-1 in bit ctz(t).
        const auto b = static_cast<std::size_t>(std::countr_zero(t));
        e += flip_delta(q, z, b);
        z[b] ^= 1u;
        if (checkpoint) checkpoint(z, e);
        if (e < best_e || (e == best_e && lex_less(z, best_z))) {
            best_e = e;
            best_z = z;
        }
    }
    // The incremental accumulator can drift over long enumerations; the
    // stored energy is recomputed from scratch.
    best_e = energy(q, best_z);
    return BinarySolution{std::move(best_z), best_e};
}

BinarySolution solve_anneal(const QuboProblem& q, const AnnealSchedule& sched) {
    if (q.dim == 0) throw SizeError("solve_anneal: empty problem");
    if (!(sched.t_start > sched.t_end && sched.t_end > 0.0))
        throw Error("solve_anneal: need t_start > t_end > 0");
    if (sched.sweeps < 1 || sched.restarts < 1)
        throw Error("solve_anneal: sweeps and restarts must be positive");

    std::vector<std::uint8_t> global_z;
    double global_e = std::numeric_limits<double>::infinity();

    const double cool = sched.sweeps > 1
                            ? std::pow(sched.t_end / sched.t_start,
                                       1.0 / static_cast<double>(sched.sweeps - 1))
                            : 1.0;

    for (int r = 0; r < sched.restarts; ++r) {
        Rng rng(derive_seed(sched.seed, static_cast<std::uint64_t>(r)));
        std::vector<std::uint8_t> z(q.dim);
        for (auto& bit : z) bit = static_cast<std::uint8_t>(rng.next_bit());
        double e = energy(q, z);
        std::vector<std::uint8_t> best_z = z;
        double best_e = e;

        double temperature = sched.t_start;
        for (int s = 0; s < sched.sweeps; ++s) {
            for (std::size_t p = 0; p < q.dim; ++p) {
                const std::size_t b = rng.next_index(q.dim);
                const double delta = flip_delta(q, z, b);
                if (delta <= 0.0 || rng.next_u01() < std::exp(-delta / temperature)) {
                    z[b] ^= 1u;
                    e += delta;
                    if (e < best_e) {
                        best_e = e;
                        best_z = z;
                    }
                }
            }
            temperature *= cool;
        }

        greedy_descent(q, best_z);
        const double final_e = energy(q, best_z);
        if (final_e < global_e || (final_e == global_e && lex_less(best_z, global_z))) {
            global_e = final_e;
            global_z = std::move(best_z);
        }
    }

    return BinarySolution{std::move(global_z), global_e};
}

SvmModel decode_model(const QuboProblem& q, const BinarySolution& sol,
                      const Eigen::MatrixXd& points, const std::vector<int>& labels,
                      const Eigen::VectorXd& weights, const KernelSpec& spec,
                      const EncodingSpec& enc) {
    validate_encoding(enc);
    const Eigen::Index m = points.rows();
    const auto bits = static_cast<std::size_t>(enc.bits);
    if (sol.z.size() != static_cast<std::size_t>(m) * bits)
        throw DimensionError("decode_model: solution length does not match points * bits");
    if (static_cast<Eigen::Index>(labels.size()) != m || weights.size() != m)
        throw DimensionError("decode_model: labels/weights length mismatch");
    if (q.dim != sol.z.size()) throw DimensionError("decode_model: problem/solution mismatch");

    SvmModel model;
    model.points = points;
    model.labels = labels;
    model.kernel = spec;
    model.C = enc.alpha_max();
    model.weights = enc.weighting == QuboWeighting::encoded
                        ? weights
                        : Eigen::VectorXd::Ones(m);
    model.alphas.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const std::span<const std::uint8_t> slice(sol.z.data() +
                                                      static_cast<std::size_t>(i) * bits,
                                                  bits);
        model.alphas(i) = alpha_from_bits(slice, enc, weights(i));
    }
    model.bias = compute_bias(model);
    return model;
}

double constraint_residual(const SvmModel& model) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < model.size(); ++i)
        s += model.alphas(i) * static_cast<double>(model.labels[static_cast<std::size_t>(i)]);
    return std::abs(s);
}

}  // namespace corsvm
