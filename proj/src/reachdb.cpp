#include "reachplan/reachdb.hpp"

#include "reachplan/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

namespace reachplan {

namespace {

constexpr std::array<char, 4> kMagic{'R', 'P', 'D', 'B'};
constexpr std::size_t kRollDim = 3;
constexpr std::size_t kYawDim = 5;

bool divides(double cell, double span) {
    const double n = std::round(span / cell);
    return n >= 1.0 && std::abs(n * cell - span) <= 1e-12;
}

// Index range occupied by wrapped angles in [-pi, pi).
std::int32_t wrapped_min(double cell) { return static_cast<std::int32_t>(std::floor(-kPi / cell)); }
std::int32_t wrapped_max(double cell) {
    return static_cast<std::int32_t>(std::floor(std::nextafter(kPi, 0.0) / cell));
}

std::int32_t wrap_index(std::int64_t k, std::int32_t lo, std::int32_t hi) {
    const std::int64_t n = static_cast<std::int64_t>(hi) - lo + 1;
    std::int64_t r = (k - lo) % n;
    if (r < 0) {
        r += n;
    }
    return static_cast<std::int32_t>(lo + r);
}

// value / cell, snapped onto an integer when within rounding noise of it
// (0.6 / 0.05 evaluates to 11.999999999999998).
double cell_quotient(double value, double cell) {
    const double q = value / cell;
    const double r = std::round(q);
    return std::abs(q - r) <= 1e-9 * std::max(1.0, std::abs(r)) ? r : q;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double unit_uniform(std::uint64_t seed, std::uint64_t counter) {
    const std::uint64_t bits = splitmix64(seed ^ splitmix64(counter));
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Little-endian byte packing.
class Writer {
  public:
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        buf_.insert(buf_.end(), p, p + n);
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) {
            buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    std::vector<std::uint8_t>& buffer() { return buf_; }

  private:
    std::vector<std::uint8_t> buf_;
};

class Reader {
  public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

    void set_context(std::string context) { context_ = std::move(context); }
    std::size_t position() const { return pos_; }

    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) {
            throw DbLoadError(DbLoadError::Kind::Truncated, "database file truncated in " + context_);
        }
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
        }
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
        }
        pos_ += 8;
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }
    void bytes(std::uint8_t* out, std::size_t n) {
        need(n);
        std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(pos_), n, out);
        pos_ += n;
    }

  private:
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
    std::string context_ = "header";
};

} // namespace

VoxelSpec VoxelSpec::uniform(double position, double rotation) {
    return VoxelSpec{{position, position, position, rotation, rotation, rotation}};
}

bool VoxelSpec::positive() const {
    return std::all_of(cell.begin(), cell.end(), [](double c) { return std::isfinite(c) && c > 0.0; });
}

bool VoxelSpec::angular_aligned() const {
    return divides(cell[3], kTwoPi) && divides(cell[4], kPi) && divides(cell[5], kTwoPi);
}

void VoxelSpec::validate() const {
    if (!positive()) {
        throw ContractError("voxel grid lengths must be positive");
    }
    if (!angular_aligned()) {
        throw ContractError("roll/yaw grid lengths must divide 2pi and pitch must divide pi");
    }
}

VoxelKey voxel_index(const Pose6& pose, const VoxelSpec& spec) {
    const auto v = canonicalize(pose).values();
    VoxelKey key;
    for (std::size_t d = 0; d < 6; ++d) {
        const auto k = static_cast<std::int64_t>(std::floor(cell_quotient(v[d], spec.cell[d])));
        const bool wraps = (d == kRollDim || d == kYawDim) && spec.angular_aligned();
        key.idx[d] = wraps ? wrap_index(k, wrapped_min(spec.cell[d]), wrapped_max(spec.cell[d]))
                           : static_cast<std::int32_t>(k);
    }
    return key;
}

std::vector<std::vector<double>> joint_samples(const KinematicChain& chain, const SamplingSpec& sampling) {
    chain.validate();
    if (sampling.steps.size() != 1 && sampling.steps.size() != chain.dof()) {
        throw ContractError("sampling needs one step or one step per joint");
    }
    std::vector<std::vector<double>> out;
    for (std::size_t j = 0; j < chain.dof(); ++j) {
        const double step = sampling.step(j);
        if (!std::isfinite(step) || step <= 0.0) {
            throw ContractError("sampling step of joint " + std::to_string(j) + " must be positive");
        }
        const auto& joint = chain.joints[j];
        std::vector<double> values;
        for (std::uint64_t k = 0;; ++k) {
            const double v = joint.limit_lo + static_cast<double>(k) * step;
            if (v > joint.limit_hi + 1e-12) {
                break;
            }
            if (joint.continuous() && v >= joint.limit_lo + kTwoPi - 1e-9) {
                break;
            }
            values.push_back(v);
        }
        out.push_back(std::move(values));
    }
    return out;
}

std::uint64_t sample_count(const KinematicChain& chain, const SamplingSpec& sampling) {
    std::uint64_t total = 1;
    for (const auto& s : joint_samples(chain, sampling)) {
        total *= s.size();
    }
    return total;
}

Fingerprint chain_fingerprint(const KinematicChain& chain) {
    Writer w;
    w.u32(static_cast<std::uint32_t>(chain.dof()));
    for (const auto& j : chain.joints) {
        for (double v : {j.a, j.alpha, j.d, j.theta_offset, j.limit_lo, j.limit_hi}) {
            w.f64(v);
        }
    }
    for (double v : chain.tool.values()) {
        w.f64(v);
    }
    return sha256(w.buffer());
}

ReachDB ReachDB::from_records(const VoxelSpec& spec, const Fingerprint& fingerprint, std::size_t dof,
                              std::vector<ReachRecord> records) {
    if (!spec.positive()) {
        throw ContractError("voxel grid lengths must be positive");
    }
    std::vector<VoxelKey> keys;
    keys.reserve(records.size());
    for (const auto& r : records) {
        if (r.config.size() != dof) {
            throw ContractError("record joint count does not match database dof");
        }
        keys.push_back(voxel_index(r.pose, spec));
    }
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });

    ReachDB db;
    db.spec_ = spec;
    db.fingerprint_ = fingerprint;
    db.dof_ = dof;
    db.records_.reserve(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& key = keys[order[i]];
        if (db.directory_.empty() || db.directory_.back().key != key) {
            db.directory_.push_back(VoxelEntry{key, i, 0});
        }
        ++db.directory_.back().count;
        db.records_.push_back(std::move(records[order[i]]));
    }
    return db;
}

std::span<const ReachRecord> ReachDB::voxel(const VoxelKey& key) const {
    const auto it = std::lower_bound(directory_.begin(), directory_.end(), key,
                                     [](const VoxelEntry& e, const VoxelKey& k) { return e.key < k; });
    if (it == directory_.end() || it->key != key) {
        return {};
    }
    return std::span<const ReachRecord>(records_).subspan(it->offset, it->count);
}

std::span<const ReachRecord> ReachDB::query(const Pose6& target) const {
    return voxel(voxel_index(target, spec_));
}

std::vector<std::span<const ReachRecord>>
ReachDB::collect(const std::array<std::vector<std::int32_t>, 6>& candidates,
                 const std::array<bool, 6>& free_dims) const {
    std::vector<std::span<const ReachRecord>> out;
    std::size_t prefix = 0;
    while (prefix < 6 && !free_dims[prefix]) {
        ++prefix;
    }
    auto accepts = [&](const VoxelKey& key) {
        for (std::size_t d = prefix; d < 6; ++d) {
            if (free_dims[d]) {
                continue;
            }
            const auto& c = candidates[d];
            if (std::find(c.begin(), c.end(), key.idx[d]) == c.end()) {
                return false;
            }
        }
        return true;
    };

    // Enumerate the constrained prefix combinations in ascending order, then
    // scan the directory range sharing that prefix.
    std::array<std::size_t, 6> pick{};
    for (;;) {
        VoxelKey lo;
        lo.idx.fill(std::numeric_limits<std::int32_t>::min());
        for (std::size_t d = 0; d < prefix; ++d) {
            lo.idx[d] = candidates[d][pick[d]];
        }
        auto it = std::lower_bound(directory_.begin(), directory_.end(), lo,
                                   [](const VoxelEntry& e, const VoxelKey& k) { return e.key < k; });
        for (; it != directory_.end(); ++it) {
            if (!std::equal(it->key.idx.begin(), it->key.idx.begin() + static_cast<std::ptrdiff_t>(prefix),
                            lo.idx.begin())) {
                break;
            }
            if (accepts(it->key)) {
                out.push_back(std::span<const ReachRecord>(records_).subspan(it->offset, it->count));
            }
            if (prefix == 6) {
                break;
            }
        }
        std::size_t d = prefix;
        while (d > 0) {
            --d;
            if (++pick[d] < candidates[d].size()) {
                break;
            }
            pick[d] = 0;
            if (d == 0) {
                return out;
            }
        }
        if (prefix == 0) {
            return out;
        }
    }
}

std::vector<std::span<const ReachRecord>> ReachDB::query_voxels(const Pose6& target,
                                                                const PoseMask& mask) const {
    const VoxelKey key = voxel_index(target, spec_);
    std::array<std::vector<std::int32_t>, 6> candidates;
    std::array<bool, 6> free_dims{};
    for (std::size_t d = 0; d < 6; ++d) {
        free_dims[d] = !mask[d];
        candidates[d] = {key.idx[d]};
    }
    return collect(candidates, free_dims);
}

std::vector<std::span<const ReachRecord>> ReachDB::interval_voxels(const Pose6& target,
                                                                   const PoseMask& mask) const {
    const auto v = canonicalize(target).values();
    std::array<std::vector<std::int32_t>, 6> candidates;
    std::array<bool, 6> free_dims{};
    for (std::size_t d = 0; d < 6; ++d) {
        free_dims[d] = !mask[d];
        if (free_dims[d]) {
            continue;
        }
        const double cell = spec_.cell[d];
        const double q = cell_quotient(v[d], cell);
        const double k0 = std::floor(q);
        const auto base = static_cast<std::int64_t>(k0);
        // The open interval (t - cell, t + cell) always reaches the cell below;
        // it reaches the cell above unless t sits exactly on a cell boundary.
        const std::int64_t lo = base - 1;
        const std::int64_t hi = q == k0 ? base : base + 1;
        auto& c = candidates[d];
        for (std::int64_t k = lo; k <= hi; ++k) {
            if (d == kRollDim || d == kYawDim) {
                c.push_back(wrap_index(k, wrapped_min(cell), wrapped_max(cell)));
            } else {
                c.push_back(static_cast<std::int32_t>(k));
            }
        }
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
    }
    return collect(candidates, free_dims);
}

std::vector<const ReachRecord*> ReachDB::query_interval(const Pose6& target, const PoseMask& mask) const {
    std::vector<const ReachRecord*> out;
    for (const auto& span : interval_voxels(target, mask)) {
        for (const auto& r : span) {
            out.push_back(&r);
        }
    }
    return out;
}

void ReachDB::verify_chain(const KinematicChain& chain) const {
    if (chain_fingerprint(chain) != fingerprint_ || chain.dof() != dof_) {
        throw FingerprintMismatchError("database was built for a different kinematic chain");
    }
}

std::size_t ReachDB::count_violations(const KinematicChain* chain, double tol) const {
    std::size_t bad = 0;
    for (const auto& entry : directory_) {
        for (std::size_t i = entry.offset; i < entry.offset + entry.count; ++i) {
            const auto& r = records_[i];
            if (voxel_index(r.pose, spec_) != entry.key) {
                ++bad;
                continue;
            }
            if (chain != nullptr) {
                const auto d = pose_delta(forward_kinematics(*chain, r.config), r.pose);
                if (std::any_of(d.begin(), d.end(), [&](double x) { return std::abs(x) > tol; })) {
                    ++bad;
                }
            }
        }
    }
    return bad;
}

ReachDB build(const KinematicChain& chain, const SamplingSpec& sampling, const VoxelSpec& spec,
              const BuildOptions& options) {
    chain.validate();
    spec.validate();
    if (sampling.w_min < 0.0 || sampling.thin_exponent < 0.0 || !(sampling.thin_reference > 0.0)) {
        throw ContractError("manipulability acceptance parameters out of range");
    }
    const auto samples = joint_samples(chain, sampling);
    const std::uint64_t total = sample_count(chain, sampling);
    const std::size_t n = chain.dof();

    auto run_range = [&](std::uint64_t begin, std::uint64_t end) {
        std::vector<ReachRecord> out;
        JointConfig q{std::vector<double>(n)};
        for (std::uint64_t linear = begin; linear < end; ++linear) {
            std::uint64_t rest = linear;
            for (std::size_t j = n; j-- > 0;) {
                const auto m = samples[j].size();
                q[j] = samples[j][rest % m];
                rest /= m;
            }
            const double w = manipulability(chain, q);
            if (w < sampling.w_min) {
                continue;
            }
            if (sampling.thin_exponent > 0.0) {
                const double p = std::min(1.0, std::pow(w / sampling.thin_reference, sampling.thin_exponent));
                if (unit_uniform(sampling.seed, linear) >= p) {
                    continue;
                }
            }
            out.push_back(ReachRecord{forward_kinematics(chain, q), q, w});
        }
        return out;
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, 64));
    std::vector<std::vector<ReachRecord>> parts(threads);
    if (threads == 1) {
        parts[0] = run_range(0, total);
    } else {
        std::vector<std::jthread> workers;
        for (unsigned t = 0; t < threads; ++t) {
            const std::uint64_t begin = total * t / threads;
            const std::uint64_t end = total * (t + 1) / threads;
            workers.emplace_back([&, t, begin, end] { parts[t] = run_range(begin, end); });
        }
    }
    std::vector<ReachRecord> records;
    for (auto& part : parts) {
        records.insert(records.end(), std::make_move_iterator(part.begin()),
                       std::make_move_iterator(part.end()));
    }
    if (records.empty()) {
        throw BuildError("every sampled configuration was rejected; the database would be empty");
    }
    return ReachDB::from_records(spec, chain_fingerprint(chain), n, std::move(records));
}

std::vector<std::uint8_t> serialize(const ReachDB& db) {
    Writer w;
    w.bytes(kMagic.data(), kMagic.size());
    w.u32(kDbFormatVersion);
    w.bytes(db.fingerprint().data(), db.fingerprint().size());
    for (double c : db.voxel_spec().cell) {
        w.f64(c);
    }
    w.u64(db.voxel_count());
    w.u64(db.record_count());
    w.u32(static_cast<std::uint32_t>(db.dof()));
    for (const auto& e : db.directory()) {
        for (auto i : e.key.idx) {
            w.i32(i);
        }
        w.u64(e.offset);
        w.u32(e.count);
    }
    for (const auto& r : db.records()) {
        for (double v : r.pose.values()) {
            w.f64(v);
        }
        for (double a : r.config.angles) {
            w.f64(a);
        }
        w.f64(r.manipulability);
    }
    const Digest check = sha256(w.buffer());
    w.bytes(check.data(), check.size());
    return std::move(w.buffer());
}

ReachDB deserialize(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    std::array<std::uint8_t, 4> magic{};
    r.bytes(magic.data(), magic.size());
    if (!std::equal(magic.begin(), magic.end(), kMagic.begin(),
                    [](std::uint8_t a, char b) { return a == static_cast<std::uint8_t>(b); })) {
        throw DbLoadError(DbLoadError::Kind::BadMagic, "not a reachability database (bad magic)");
    }
    const std::uint32_t version = r.u32();
    if (version != kDbFormatVersion) {
        throw DbLoadError(DbLoadError::Kind::UnsupportedVersion,
                          "unsupported database format version " + std::to_string(version));
    }
    Fingerprint fp{};
    r.bytes(fp.data(), fp.size());
    VoxelSpec spec;
    for (auto& c : spec.cell) {
        c = r.f64();
    }
    const std::uint64_t voxel_count = r.u64();
    const std::uint64_t record_count = r.u64();
    const std::uint32_t dof = r.u32();
    if (!spec.positive() || dof == 0) {
        throw DbLoadError(DbLoadError::Kind::Corrupt, "database header holds invalid voxel spec or dof");
    }

    std::vector<ReachDB::VoxelEntry> directory;
    std::uint64_t expected_offset = 0;
    for (std::uint64_t v = 0; v < voxel_count; ++v) {
        r.set_context("voxel directory entry " + std::to_string(v));
        ReachDB::VoxelEntry e;
        for (auto& i : e.key.idx) {
            i = r.i32();
        }
        e.offset = r.u64();
        e.count = r.u32();
        if (e.offset != expected_offset || e.count == 0 ||
            (!directory.empty() && !(directory.back().key < e.key))) {
            throw DbLoadError(DbLoadError::Kind::Corrupt,
                              "voxel directory entry " + std::to_string(v) + " is inconsistent");
        }
        expected_offset += e.count;
        directory.push_back(e);
    }
    if (expected_offset != record_count) {
        throw DbLoadError(DbLoadError::Kind::Corrupt, "voxel directory does not account for every record");
    }

    std::vector<ReachRecord> records;
    records.reserve(record_count);
    for (std::uint64_t i = 0; i < record_count; ++i) {
        r.set_context("record " + std::to_string(i));
        ReachRecord rec;
        std::array<double, 6> pv{};
        for (auto& v : pv) {
            v = r.f64();
        }
        rec.pose = Pose6::from_values(pv);
        rec.pose.near_gimbal = is_near_gimbal(rec.pose.pitch);
        rec.config.angles.resize(dof);
        for (auto& a : rec.config.angles) {
            a = r.f64();
        }
        rec.manipulability = r.f64();
        records.push_back(std::move(rec));
    }
    const std::size_t body = r.position();
    r.set_context("checksum trailer");
    Digest stored{};
    r.bytes(stored.data(), stored.size());
    if (stored != sha256(bytes.first(body))) {
        throw DbLoadError(DbLoadError::Kind::ChecksumMismatch, "database checksum mismatch");
    }
    if (r.position() != bytes.size()) {
        throw DbLoadError(DbLoadError::Kind::Corrupt, "trailing bytes after database checksum");
    }

    ReachDB db = ReachDB::from_records(spec, fp, dof, std::move(records));
    if (!std::equal(db.directory().begin(), db.directory().end(), directory.begin(), directory.end())) {
        throw DbLoadError(DbLoadError::Kind::Corrupt, "stored records do not match their voxel keys");
    }
    return db;
}

void save(const ReachDB& db, const std::filesystem::path& path) {
    const auto bytes = serialize(db);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DbLoadError(DbLoadError::Kind::Io, "cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw DbLoadError(DbLoadError::Kind::Io, "failed writing " + path.string());
    }
}

ReachDB load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DbLoadError(DbLoadError::Kind::Io, "cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

std::uint64_t ProjectionGrid::at(std::int32_t ix, std::int32_t iy, std::int32_t iz) const {
    const std::array<std::int32_t, 3> p{ix, iy, iz};
    std::size_t flat = 0;
    for (std::size_t d = 0; d < 3; ++d) {
        const std::int32_t rel = p[d] - lo[d];
        if (rel < 0 || rel >= size[d]) {
            return 0;
        }
        flat = flat * static_cast<std::size_t>(size[d]) + static_cast<std::size_t>(rel);
    }
    return counts[flat];
}

std::uint64_t ProjectionGrid::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

ProjectionGrid reachability_projection(const ReachDB& db) {
    if (db.record_count() == 0) {
        throw ContractError("projection of an empty database");
    }
    std::array<std::int32_t, 3> lo{}, hi{};
    lo.fill(std::numeric_limits<std::int32_t>::max());
    hi.fill(std::numeric_limits<std::int32_t>::min());
    for (const auto& e : db.directory()) {
        for (std::size_t d = 0; d < 3; ++d) {
            lo[d] = std::min(lo[d], e.key.idx[d]);
            hi[d] = std::max(hi[d], e.key.idx[d]);
        }
    }
    ProjectionGrid grid;
    grid.lo = lo;
    std::size_t cells = 1;
    for (std::size_t d = 0; d < 3; ++d) {
        grid.size[d] = hi[d] - lo[d] + 1;
        cells *= static_cast<std::size_t>(grid.size[d]);
    }
    grid.counts.assign(cells, 0);
    for (const auto& e : db.directory()) {
        std::size_t flat = 0;
        for (std::size_t d = 0; d < 3; ++d) {
            flat = flat * static_cast<std::size_t>(grid.size[d]) + static_cast<std::size_t>(e.key.idx[d] - lo[d]);
        }
        grid.counts[flat] += e.count;
    }
    return grid;
}

} // namespace reachplan
