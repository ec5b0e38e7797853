#include "bellnav/cache.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

namespace bellnav {

static_assert(std::endian::native == std::endian::little, "cache layout assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'B', 'N', 'U', 'M', 'P', 'S', '\0', '\1'};

std::string raw_sha256(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if(EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 failed");
    return {reinterpret_cast<const char *>(md), len};
}

class Writer {
  public:
    template <class T> void put(T v) {
        char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        buf.append(b, sizeof(T));
    }
    std::string buf;
};

class Reader {
  public:
    explicit Reader(std::string_view d) : data(d) {}
    template <class T> T get() {
        if(pos + sizeof(T) > data.size()) throw NumericError("truncated cache file");
        T v;
        std::memcpy(&v, data.data() + pos, sizeof(T));
        pos += sizeof(T);
        return v;
    }
    std::string_view data;
    std::size_t pos = 0;
};

} // namespace

std::string sha256_hex(std::string_view data) {
    const auto raw = raw_sha256(data);
    std::string out;
    for(unsigned char c : raw) out += fmt::format("{:02x}", c);
    return out;
}

std::string CacheKey::canonical() const {
    std::string steps;
    for(double s : schedule.steps) steps += fmt::format("{:.17g},", s);
    return fmt::format("schema={};kind={};J={:.17g};h={:.17g};delta={:.17g};u={};chi={};tol={:.17g};schedule={}:{}:{}:{:.17g}",
                       kCacheSchemaVersion, to_string(spec.kind), spec.J, spec.h, spec.delta, spec.u, chi, schedule.tol, kScheduleVersion,
                       steps, schedule.max_steps, schedule.svd_cutoff);
}

std::string CacheKey::digest() const { return sha256_hex(canonical()); }

GroundStateCache::GroundStateCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path GroundStateCache::path_for(const CacheKey &key) const { return dir_ / (key.digest() + ".umps"); }

void GroundStateCache::store(const CacheKey &key, const UniformMPS &mps) const {
    Writer w;
    w.buf.append(kMagic, sizeof(kMagic));
    w.put<std::uint32_t>(kCacheSchemaVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(key.spec.kind));
    w.put<double>(key.spec.J);
    w.put<double>(key.spec.h);
    w.put<double>(key.spec.delta);
    w.put<std::int32_t>(key.spec.u);
    w.put<std::int32_t>(key.chi);
    w.put<double>(key.schedule.tol);
    w.put<std::int32_t>(kScheduleVersion);
    w.put<double>(mps.energy_per_site);
    w.put<std::int32_t>(mps.steps);
    w.put<double>(mps.last_delta);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(mps.tensors.size()));
    for(const auto &t : mps.tensors) {
        w.put<std::uint32_t>(static_cast<std::uint32_t>(t.left_dim()));
        w.put<std::uint32_t>(static_cast<std::uint32_t>(t.right_dim()));
        for(const auto &a : t.A)
            for(Eigen::Index r = 0; r < a.rows(); ++r)
                for(Eigen::Index c = 0; c < a.cols(); ++c) {
                    w.put<double>(a(r, c).real());
                    w.put<double>(a(r, c).imag());
                }
    }
    w.put<std::uint32_t>(static_cast<std::uint32_t>(mps.schmidt_weights.size()));
    for(const auto &s : mps.schmidt_weights) {
        w.put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
        for(Eigen::Index i = 0; i < s.size(); ++i) w.put<double>(s[i]);
    }
    w.buf += raw_sha256(w.buf);

    std::filesystem::create_directories(dir_);
    const auto final_path = path_for(key);
    auto tmp              = final_path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if(!out) throw ResourceError(fmt::format("cannot write cache file {}", tmp.string()));
        out.write(w.buf.data(), static_cast<std::streamsize>(w.buf.size()));
        if(!out) throw ResourceError(fmt::format("short write to cache file {}", tmp.string()));
    }
    std::filesystem::rename(tmp, final_path);
}

std::optional<UniformMPS> GroundStateCache::load(const CacheKey &key) const {
    const auto path = path_for(key);
    std::ifstream in(path, std::ios::binary);
    if(!in) return std::nullopt;
    const std::string data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    try {
        constexpr std::size_t kDigest = 32;
        if(data.size() < sizeof(kMagic) + kDigest || std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0)
            throw NumericError("bad header");
        const std::string_view body(data.data(), data.size() - kDigest);
        if(raw_sha256(body) != data.substr(data.size() - kDigest)) throw NumericError("checksum mismatch");

        Reader r(body);
        r.pos = sizeof(kMagic);
        if(r.get<std::uint32_t>() != kCacheSchemaVersion) throw NumericError("schema version mismatch");
        UniformMPS mps;
        mps.spec.kind  = static_cast<ModelKind>(r.get<std::uint32_t>());
        mps.spec.J     = r.get<double>();
        mps.spec.h     = r.get<double>();
        mps.spec.delta = r.get<double>();
        mps.spec.u     = r.get<std::int32_t>();
        mps.chi        = r.get<std::int32_t>();
        const double tol = r.get<double>();
        const int sched  = r.get<std::int32_t>();
        if(mps.spec.kind != key.spec.kind || mps.spec.J != key.spec.J || mps.spec.h != key.spec.h || mps.spec.delta != key.spec.delta ||
           mps.spec.u != key.spec.u || mps.chi != key.chi || tol != key.schedule.tol || sched != kScheduleVersion)
            throw NumericError("key fields do not match");
        mps.energy_per_site = r.get<double>();
        mps.steps           = r.get<std::int32_t>();
        mps.last_delta      = r.get<double>();
        const auto n        = r.get<std::uint32_t>();
        if(n > 64) throw NumericError("implausible cell size");
        for(std::uint32_t k = 0; k < n; ++k) {
            const auto dl = r.get<std::uint32_t>(), dr = r.get<std::uint32_t>();
            if(dl > 256 || dr > 256) throw NumericError("implausible bond dimension");
            SiteTensor t;
            for(auto &a : t.A) {
                a.resize(dl, dr);
                for(Eigen::Index i = 0; i < a.rows(); ++i)
                    for(Eigen::Index j = 0; j < a.cols(); ++j) {
                        const double re = r.get<double>();
                        a(i, j)         = cplx(re, r.get<double>());
                    }
            }
            mps.tensors.push_back(std::move(t));
        }
        const auto nb = r.get<std::uint32_t>();
        if(nb > 64) throw NumericError("implausible bond count");
        for(std::uint32_t k = 0; k < nb; ++k) {
            const auto len = r.get<std::uint32_t>();
            if(len > 256) throw NumericError("implausible Schmidt rank");
            Eigen::VectorXd s(len);
            for(std::uint32_t i = 0; i < len; ++i) s[i] = r.get<double>();
            mps.schmidt_weights.push_back(std::move(s));
        }
        if(r.pos != body.size()) throw NumericError("trailing bytes");
        return mps;
    } catch(const NumericError &e) {
        spdlog::warn("cache file {} rejected ({}); recomputing", path.string(), e.what());
        return std::nullopt;
    }
}

UniformMPS GroundStateCache::get_or_compute(const CacheKey &key, bool *hit) const {
    if(auto cached = load(key)) {
        spdlog::info("cache hit {}", path_for(key).filename().string());
        if(hit != nullptr) *hit = true;
        return std::move(*cached);
    }
    if(hit != nullptr) *hit = false;
    auto mps = ground_state_umps(key.spec, key.chi, key.schedule);
    store(key, mps);
    spdlog::info("cache store {}", path_for(key).filename().string());
    return mps;
}

} // namespace bellnav
