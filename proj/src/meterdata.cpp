#include "loadsig/meterdata.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "loadsig/error.hpp"

namespace loadsig {

namespace {

constexpr std::string_view kSamplesHeader = "t_s,phase,P_W,Q_var,THD_pct";
constexpr char kWaveformMagic[4] = {'L', 'S', 'W', 'F'};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto next = s.find(sep, pos);
        if (next == std::string_view::npos) {
            out.push_back(s.substr(pos));
            return out;
        }
        out.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Data, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string line_prefix(std::size_t line) { return "line " + std::to_string(line) + ": "; }

// Validates per-leg ordering and builds the recording from collected rows.
MeterRecording build_recording(const Epoch& epoch, const std::vector<PowerSample>& rows,
                               const std::vector<std::size_t>& lines,
                               const std::vector<std::optional<CurrentSpectrum>>* spectra) {
    std::array<std::optional<std::int64_t>, 2> last;
    std::int64_t lo = std::numeric_limits<std::int64_t>::max();
    std::int64_t hi = std::numeric_limits<std::int64_t>::min();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        auto& prev = last[static_cast<int>(r.phase)];
        if (prev && r.t == *prev) {
            throw Error(ErrorKind::Data, line_prefix(lines[i]) + "duplicate timestamp " + std::to_string(r.t));
        }
        if (prev && r.t < *prev) {
            throw Error(ErrorKind::Data, line_prefix(lines[i]) + "out-of-order row (t=" + std::to_string(r.t) + ")");
        }
        prev = r.t;
        lo = std::min(lo, r.t);
        hi = std::max(hi, r.t);
    }
    if (rows.empty()) {
        MeterRecording rec(epoch, 0, 0);
        rec.finalize();
        return rec;
    }
    MeterRecording rec(epoch, lo, hi - lo + 1);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rec.set_sample(rows[i]);
        if (spectra && (*spectra)[i]) rec.set_spectrum(rows[i].phase, rows[i].t, *(*spectra)[i]);
    }
    rec.finalize();
    return rec;
}

template <typename T>
void put(std::string& out, T v) {
    static_assert(std::endian::native == std::endian::little, "waveform files are little-endian");
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

class Reader {
public:
    explicit Reader(std::string data) : data_(std::move(data)) {}

    template <typename T>
    T get() {
        if (pos_ + sizeof(T) > data_.size()) throw Error(ErrorKind::Data, "waveform file truncated");
        T v;
        std::memcpy(&v, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::string_view bytes(std::size_t n) {
        if (pos_ + n > data_.size()) throw Error(ErrorKind::Data, "waveform file truncated");
        std::string_view v(data_.data() + pos_, n);
        pos_ += n;
        return v;
    }
    bool done() const { return pos_ == data_.size(); }

private:
    std::string data_;
    std::size_t pos_ = 0;
};

}  // namespace

// ---------------------------------------------------------------------------
// Epoch

Epoch Epoch::parse(std::string_view iso) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    const std::string str(trim(iso));
    char tail = 0;
    if (std::sscanf(str.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &s, &tail) != 6) {
        throw Error(ErrorKind::Data, "invalid epoch '" + str + "', expected YYYY-MM-DDTHH:MM:SS");
    }
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 59) {
        throw Error(ErrorKind::Data, "invalid epoch '" + str + "'");
    }
    Epoch e;
    e.time = local_days{ymd} + hours{h} + minutes{mi} + seconds{s};
    e.explicit_value = true;
    return e;
}

std::string Epoch::to_string() const {
    using namespace std::chrono;
    const auto days_part = floor<days>(time);
    const year_month_day ymd{days_part};
    const auto tod = time - days_part;
    const auto secs = tod.count();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long long>(secs / 3600), static_cast<long long>((secs / 60) % 60),
                  static_cast<long long>(secs % 60));
    return buf;
}

int Epoch::seconds_of_day(std::int64_t t) const {
    using namespace std::chrono;
    const auto at = time + seconds{t};
    return static_cast<int>((at - floor<days>(at)).count());
}

unsigned Epoch::weekday(std::int64_t t) const {
    using namespace std::chrono;
    const auto at = time + seconds{t};
    return std::chrono::weekday{floor<days>(at)}.c_encoding();
}

std::int64_t Epoch::day_start(std::int64_t t) const { return t - seconds_of_day(t); }

Epoch default_epoch() {
    using namespace std::chrono;
    Epoch e;
    e.time = local_days{year{2024} / January / 1};
    e.explicit_value = false;
    return e;
}

// ---------------------------------------------------------------------------
// MeterRecording

MeterRecording::MeterRecording(Epoch epoch, std::int64_t start, std::int64_t duration)
    : epoch_(epoch), start_(start), duration_(duration) {
    if (duration < 0) throw Error(ErrorKind::Data, "negative recording duration");
    const auto n = static_cast<std::size_t>(duration);
    for (auto& c : cols_) {
        c.p.assign(n, 0.0);
        c.q.assign(n, 0.0);
        c.thd.assign(n, std::numeric_limits<double>::quiet_NaN());
        c.present.assign(n, 0);
    }
}

std::size_t MeterRecording::index(std::int64_t t) const {
    if (t < start_ || t >= end()) {
        throw Error(ErrorKind::Data, "timestamp " + std::to_string(t) + " outside recording span");
    }
    return static_cast<std::size_t>(t - start_);
}

void MeterRecording::set_sample(const PowerSample& s) {
    const auto i = index(s.t);
    auto& c = cols_[static_cast<int>(s.phase)];
    c.p[i] = s.p;
    c.q[i] = s.q;
    c.thd[i] = s.thd ? *s.thd : std::numeric_limits<double>::quiet_NaN();
    c.present[i] = 1;
    active_[static_cast<int>(s.phase)] = true;
}

void MeterRecording::set_spectrum(Phase phase, std::int64_t t, const CurrentSpectrum& s) {
    const auto i = index(t);
    auto& c = cols_[static_cast<int>(phase)];
    if (c.spectrum.empty()) c.spectrum.resize(static_cast<std::size_t>(duration_));
    c.spectrum[i] = s;
}

void MeterRecording::clear_sample(Phase phase, std::int64_t t) {
    const auto i = index(t);
    auto& c = cols_[static_cast<int>(phase)];
    c.present[i] = 0;
    c.p[i] = 0.0;
    c.q[i] = 0.0;
    c.thd[i] = std::numeric_limits<double>::quiet_NaN();
    if (!c.spectrum.empty()) c.spectrum[i] = CurrentSpectrum{};
}

void MeterRecording::finalize() {
    gaps_.clear();
    std::int64_t open = -1;  // first missing second of the current gap
    for (std::int64_t i = 0; i < duration_; ++i) {
        bool missing = false;
        for (int ph = 0; ph < 2; ++ph) {
            if (active_[ph] && !cols_[ph].present[static_cast<std::size_t>(i)]) missing = true;
        }
        if (missing && open < 0) open = i;
        if (!missing && open >= 0) {
            gaps_.push_back({start_ + open, start_ + i});
            open = -1;
        }
    }
    if (open >= 0) gaps_.push_back({start_ + open, end()});
}

bool MeterRecording::present(Phase p, std::int64_t t) const {
    if (t < start_ || t >= end()) return false;
    return cols_[static_cast<int>(p)].present[static_cast<std::size_t>(t - start_)] != 0;
}

std::vector<PowerSample> MeterRecording::samples(Phase p) const {
    std::vector<PowerSample> out;
    const auto& c = columns(p);
    for (std::size_t i = 0; i < c.present.size(); ++i) {
        if (!c.present[i]) continue;
        PowerSample s{start_ + static_cast<std::int64_t>(i), p, c.p[i], c.q[i], std::nullopt};
        if (!std::isnan(c.thd[i])) s.thd = c.thd[i];
        out.push_back(s);
    }
    return out;
}

std::size_t MeterRecording::sample_count() const {
    std::size_t n = 0;
    for (const auto& c : cols_) n += static_cast<std::size_t>(std::count(c.present.begin(), c.present.end(), 1));
    return n;
}

MeterRecording MeterRecording::shifted(std::int64_t dt) const {
    MeterRecording out = *this;
    out.start_ += dt;
    for (auto& g : out.gaps_) {
        g.start += dt;
        g.end += dt;
    }
    return out;
}

MeterRecording MeterRecording::with_epoch(const Epoch& epoch) const {
    MeterRecording out = *this;
    out.epoch_ = epoch;
    return out;
}

bool MeterRecording::operator==(const MeterRecording& o) const {
    if (!(epoch_ == o.epoch_) || start_ != o.start_ || duration_ != o.duration_ || active_ != o.active_ ||
        gaps_ != o.gaps_) {
        return false;
    }
    for (int ph = 0; ph < 2; ++ph) {
        const auto& a = cols_[ph];
        const auto& b = o.cols_[ph];
        if (a.present != b.present || a.p != b.p || a.q != b.q) return false;
        for (std::size_t i = 0; i < a.thd.size(); ++i) {
            const bool na = std::isnan(a.thd[i]);
            const bool nb = std::isnan(b.thd[i]);
            if (na != nb || (!na && a.thd[i] != b.thd[i])) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Samples CSV

MeterRecording parse_samples_csv(std::string_view text) {
    Epoch epoch = default_epoch();
    std::vector<PowerSample> rows;
    std::vector<std::size_t> lines;
    bool header_seen = false;
    std::size_t line_no = 0;
    for (auto raw : split(text, '\n')) {
        ++line_no;
        const auto line = trim(raw);
        if (!header_seen) {
            if (line.empty()) continue;
            if (line.front() == '#') {
                auto body = trim(line.substr(1));
                if (body.starts_with("epoch=")) epoch = Epoch::parse(body.substr(6));
                continue;
            }
            if (line != kSamplesHeader) {
                throw Error(ErrorKind::Data, line_prefix(line_no) + "expected header '" + std::string(kSamplesHeader) + "'");
            }
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != 5) {
            throw Error(ErrorKind::Data, line_prefix(line_no) + "malformed row, expected 5 fields");
        }
        PowerSample s;
        try {
            const double t = parse_double(fields[0], "t_s");
            if (t != std::floor(t)) throw Error(ErrorKind::Data, "non-1Hz cadence (t_s=" + std::string(trim(fields[0])) + ")");
            s.t = static_cast<std::int64_t>(t);
            s.phase = parse_phase(trim(fields[1]));
            s.p = parse_double(fields[2], "P_W");
            s.q = parse_double(fields[3], "Q_var");
            const auto thd = trim(fields[4]);
            if (!thd.empty()) s.thd = parse_double(thd, "THD_pct") / 100.0;
        } catch (const Error& e) {
            throw Error(ErrorKind::Data, line_prefix(line_no) + e.what());
        }
        if (s.p < 0.0) throw Error(ErrorKind::Data, line_prefix(line_no) + "negative active power");
        if (s.thd && *s.thd < 0.0) throw Error(ErrorKind::Data, line_prefix(line_no) + "negative THD");
        rows.push_back(s);
        lines.push_back(line_no);
    }
    if (!header_seen) throw Error(ErrorKind::Data, "missing header '" + std::string(kSamplesHeader) + "'");
    return build_recording(epoch, rows, lines, nullptr);
}

MeterRecording load_samples_csv(const std::filesystem::path& path) {
    try {
        return parse_samples_csv(read_file(path));
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

std::string format_samples_csv(const MeterRecording& rec) {
    std::string out;
    out.reserve(rec.sample_count() * 32 + 64);
    if (rec.epoch().explicit_value) out += "# epoch=" + rec.epoch().to_string() + "\n";
    out += kSamplesHeader;
    out += '\n';
    for (std::int64_t i = 0; i < rec.duration(); ++i) {
        for (Phase ph : {Phase::A, Phase::B}) {
            const auto& c = rec.columns(ph);
            const auto k = static_cast<std::size_t>(i);
            if (!c.present[k]) continue;
            out += std::to_string(rec.start() + i);
            out += ',';
            out += to_string(ph);
            out += ',';
            out += format_exact(c.p[k]);
            out += ',';
            out += format_exact(c.q[k]);
            out += ',';
            if (!std::isnan(c.thd[k])) out += format_short(c.thd[k] * 100.0);
            out += '\n';
        }
    }
    return out;
}

void save_samples_csv(const MeterRecording& rec, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Data, "cannot write " + path.string());
    out << format_samples_csv(rec);
}

// ---------------------------------------------------------------------------
// Waveform frames

void save_waveform_frames(const WaveformFile& file, const std::filesystem::path& path) {
    std::string out;
    out.append(kWaveformMagic, 4);
    put<std::uint16_t>(out, kWaveformFormatVersion);
    put<std::uint16_t>(out, 0);
    put<std::int64_t>(out, file.epoch.time.time_since_epoch().count());
    put<std::uint8_t>(out, file.epoch.explicit_value ? 1 : 0);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(file.frames.size()));
    for (const auto& f : file.frames) {
        f.validate();
        put<std::int64_t>(out, f.t);
        put<std::uint8_t>(out, static_cast<std::uint8_t>(f.phase));
        put<std::uint32_t>(out, static_cast<std::uint32_t>(f.points_per_cycle));
        put<std::uint32_t>(out, static_cast<std::uint32_t>(f.n_cycles));
        put<double>(out, f.nominal_freq);
        for (std::size_t i = 0; i < f.voltage.size(); ++i) {
            put<double>(out, f.voltage[i]);
            put<double>(out, f.current[i]);
        }
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorKind::Data, "cannot write " + path.string());
    os.write(out.data(), static_cast<std::streamsize>(out.size()));
}

WaveformFile read_waveform_file(const std::filesystem::path& path) {
    Reader r(read_file(path));
    const auto magic = r.bytes(4);
    if (magic != std::string_view(kWaveformMagic, 4)) {
        throw Error(ErrorKind::Data, path.string() + ": not a waveform frame file");
    }
    const auto version = r.get<std::uint16_t>();
    if (version != kWaveformFormatVersion) {
        throw Error(ErrorKind::Data, path.string() + ": unsupported waveform format version " + std::to_string(version));
    }
    r.get<std::uint16_t>();
    WaveformFile file;
    file.epoch.time = std::chrono::local_seconds{std::chrono::seconds{r.get<std::int64_t>()}};
    file.epoch.explicit_value = r.get<std::uint8_t>() != 0;
    const auto count = r.get<std::uint32_t>();
    file.frames.reserve(count);
    for (std::uint32_t k = 0; k < count; ++k) {
        WaveformFrame f;
        f.t = r.get<std::int64_t>();
        const auto ph = r.get<std::uint8_t>();
        if (ph > 1) throw Error(ErrorKind::Data, path.string() + ": frame " + std::to_string(k) + " has invalid phase");
        f.phase = static_cast<Phase>(ph);
        f.points_per_cycle = static_cast<int>(r.get<std::uint32_t>());
        f.n_cycles = static_cast<int>(r.get<std::uint32_t>());
        f.nominal_freq = r.get<double>();
        if (f.points_per_cycle < 32 || f.n_cycles < 1 || f.points_per_cycle > (1 << 16) || f.n_cycles > 1024) {
            throw Error(ErrorKind::Data, path.string() + ": frame " + std::to_string(k) + " has invalid shape");
        }
        const auto n = static_cast<std::size_t>(f.points_per_cycle) * f.n_cycles;
        f.voltage.resize(n);
        f.current.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            f.voltage[i] = r.get<double>();
            f.current[i] = r.get<double>();
        }
        file.frames.push_back(std::move(f));
    }
    if (!r.done()) throw Error(ErrorKind::Data, path.string() + ": trailing bytes after last frame");
    return file;
}

MeterRecording recording_from_frames(const WaveformFile& file) {
    std::vector<PowerSample> rows;
    std::vector<std::size_t> idx;
    std::vector<std::optional<CurrentSpectrum>> spectra;
    rows.reserve(file.frames.size());
    for (std::size_t k = 0; k < file.frames.size(); ++k) {
        const auto& f = file.frames[k];
        const auto pq = compute_pq(f);
        const auto spectrum = current_spectrum(f);
        PowerSample s{f.t, f.phase, pq.p, pq.q, std::nullopt};
        const auto h = extract_harmonics(f);
        if (!h.degenerate && h.magnitudes[0] > 0.0) s.thd = compute_thd(h);
        // Fundamental-only P can dip a hair below zero from rounding at no load.
        if (s.p < 0.0 && s.p > -1e-9) s.p = 0.0;
        rows.push_back(s);
        idx.push_back(k);
        spectra.emplace_back(spectrum);
    }
    try {
        return build_recording(file.epoch, rows, idx, &spectra);
    } catch (const Error& e) {
        std::string msg = e.what();
        if (msg.starts_with("line ")) msg.replace(0, 4, "frame");
        throw Error(e.kind(), msg);
    }
}

MeterRecording load_waveform_frames(const std::filesystem::path& path) {
    return recording_from_frames(read_waveform_file(path));
}

MeterRecording load_recording(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Data, "cannot open " + path.string());
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() == 4 && std::memcmp(magic, kWaveformMagic, 4) == 0) return load_waveform_frames(path);
    return load_samples_csv(path);
}

std::string format_events_csv(const std::vector<LoadEvent>& events) {
    std::string out = "t_s,phase_tag,direction,dP_W,dQ_var,THD_pct,spike,corrupted\n";
    for (const auto& e : events) {
        out += std::to_string(e.t);
        out += ',';
        out += to_string(e.phase);
        out += ',';
        out += to_string(e.direction);
        out += ',' + format_short(e.delta_p) + ',' + format_short(e.delta_q) + ',';
        if (e.thd) out += format_short(*e.thd * 100.0);
        out += e.spike ? ",1" : ",0";
        out += e.corrupted ? ",1\n" : ",0\n";
    }
    return out;
}

}  // namespace loadsig
