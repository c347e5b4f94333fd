// timetags.hpp - channel-tagged photon arrival times in integer picoseconds

#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace photonstat {

inline constexpr double PS_PER_S = 1e12;

enum class Channel : std::uint8_t { A = 0, B = 1 };

struct TimeTag {
    std::uint64_t t_ps = 0;
    Channel channel = Channel::A;

    friend bool operator==(const TimeTag&, const TimeTag&) = default;
};

inline bool tag_order(const TimeTag& x, const TimeTag& y) {
    if (x.t_ps != y.t_ps) return x.t_ps < y.t_ps;
    return static_cast<int>(x.channel) < static_cast<int>(y.channel);
}

struct TimeTagStream {
    std::vector<TimeTag> tags;       // nondecreasing in t_ps
    std::uint64_t duration_ps = 0;
    std::uint64_t n_a = 0;
    std::uint64_t n_b = 0;

    static TimeTagStream from_tags(std::vector<TimeTag> tags, std::uint64_t duration_ps) {
        TimeTagStream s;
        s.tags = std::move(tags);
        s.duration_ps = duration_ps;
        for (size_t i = 0; i < s.tags.size(); ++i) {
            if (i > 0 && s.tags[i].t_ps < s.tags[i - 1].t_ps)
                throw std::invalid_argument("time-tag stream: tags not sorted by time");
            if (duration_ps > 0 && s.tags[i].t_ps >= duration_ps)
                throw std::invalid_argument("time-tag stream: tag beyond run duration");
            (s.tags[i].channel == Channel::A ? s.n_a : s.n_b)++;
        }
        return s;
    }
};

// Timestamps of one channel, for correlation work.
inline std::vector<std::uint64_t> channel_times(const TimeTagStream& s, Channel ch) {
    std::vector<std::uint64_t> t;
    t.reserve(ch == Channel::A ? s.n_a : s.n_b);
    for (const TimeTag& tag : s.tags)
        if (tag.channel == ch) t.push_back(tag.t_ps);
    return t;
}

inline TimeTagStream merge_streams(const TimeTagStream& a, const TimeTagStream& b) {
    if (a.duration_ps != b.duration_ps)
        throw std::invalid_argument("merge_streams: durations differ");
    std::vector<TimeTag> merged;
    merged.reserve(a.tags.size() + b.tags.size());
    std::merge(a.tags.begin(), a.tags.end(), b.tags.begin(), b.tags.end(),
               std::back_inserter(merged), tag_order);
    TimeTagStream out;
    out.tags = std::move(merged);
    out.duration_ps = a.duration_ps;
    out.n_a = a.n_a + b.n_a;
    out.n_b = a.n_b + b.n_b;
    return out;
}

}  // namespace photonstat
