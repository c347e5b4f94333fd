// File format tests. The PHTAG layout is pinned byte for byte against a
// hand-built golden buffer; malformed files are crafted raw and must fail
// with the offending byte offset in the message.

#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "photonstat/io.hpp"

using namespace photonstat;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("ps_io_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::vector<unsigned char> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

TimeTagStream sample_stream() {
    return TimeTagStream::from_tags(
        {{0, Channel::A}, {258, Channel::B}, {258, Channel::A}, {0x0102030405060708ULL, Channel::B}},
        0x0102030405060709ULL);
}

}  // namespace

TEST_CASE("phtag bytes match the pinned layout", "[io]") {
    TempDir tmp;
    const auto f = tmp.file("tags.phtag");
    write_phtag(f, sample_stream());

    std::vector<unsigned char> expect = {'P', 'H', 'T', 'A', 'G', 0, 0, 1};
    auto rec = [&expect](unsigned char ch, std::uint64_t t) {
        expect.push_back(ch);
        for (int b = 0; b < 8; ++b) expect.push_back(static_cast<unsigned char>(t >> (8 * b)));
    };
    rec(0, 0);
    rec(1, 258);  // LE: 02 01 00 ...
    rec(0, 258);
    rec(1, 0x0102030405060708ULL);
    CHECK(slurp(f) == expect);
}

TEST_CASE("phtag round trip preserves tags and infers duration", "[io]") {
    TempDir tmp;
    const auto f = tmp.file("t.phtag");
    const auto s = sample_stream();
    write_phtag(f, s);
    const auto r = read_phtag(f);
    CHECK(r.tags == s.tags);
    CHECK(r.n_a == 2);
    CHECK(r.n_b == 2);
    CHECK(r.duration_ps == s.tags.back().t_ps + 1);

    const auto fe = tmp.file("empty.phtag");
    write_phtag(fe, TimeTagStream::from_tags({}, 5));
    const auto re = read_phtag(fe);
    CHECK(re.tags.empty());
    CHECK(re.duration_ps == 1);
}

TEST_CASE("malformed phtag files fail with byte offsets", "[io]") {
    TempDir tmp;

    const auto bad_magic = tmp.file("bad_magic.phtag");
    spit(bad_magic, {'P', 'H', 'T', 'A', 'G', 0, 0, 2});
    CHECK_THROWS_WITH(read_phtag(bad_magic),
                      Catch::Matchers::ContainsSubstring("bad PHTAG magic at byte offset 0"));

    // one full record then 4 stray bytes: truncation at offset 8 + 9 = 17
    std::vector<unsigned char> trunc = {'P', 'H', 'T', 'A', 'G', 0, 0, 1,
                                        0, 1, 0, 0, 0, 0, 0, 0, 0, 1, 2, 3, 4};
    const auto f_trunc = tmp.file("trunc.phtag");
    spit(f_trunc, trunc);
    CHECK_THROWS_WITH(read_phtag(f_trunc),
                      Catch::Matchers::ContainsSubstring("truncated record at byte offset 17"));

    std::vector<unsigned char> badch = {'P', 'H', 'T', 'A', 'G', 0, 0, 1,
                                        7, 1, 0, 0, 0, 0, 0, 0, 0};
    const auto f_badch = tmp.file("badch.phtag");
    spit(f_badch, badch);
    CHECK_THROWS_WITH(read_phtag(f_badch),
                      Catch::Matchers::ContainsSubstring("invalid channel 7 at byte offset 8"));

    // second record goes backwards in time
    std::vector<unsigned char> unsorted = {'P', 'H', 'T', 'A', 'G', 0, 0, 1,
                                           0, 9, 0, 0, 0, 0, 0, 0, 0,
                                           1, 3, 0, 0, 0, 0, 0, 0, 0};
    const auto f_uns = tmp.file("unsorted.phtag");
    spit(f_uns, unsorted);
    CHECK_THROWS_WITH(read_phtag(f_uns),
                      Catch::Matchers::ContainsSubstring("unsorted timestamp at byte offset 17"));

    CHECK_THROWS_AS(read_phtag(tmp.file("missing.phtag")), IoError);
}

TEST_CASE("tags csv round trip and header", "[io]") {
    TempDir tmp;
    const auto f = tmp.file("tags.csv");
    const auto s = sample_stream();
    write_tags_csv(f, s);

    std::ifstream in(f);
    std::string header;
    std::getline(in, header);
    CHECK(header == "channel,t_ps");
    std::string row;
    std::getline(in, row);
    CHECK(row == "A,0");
    std::getline(in, row);
    CHECK(row == "B,258");

    const auto r = read_tags_csv(f);
    CHECK(r.tags == s.tags);

    // numeric channel labels also accepted
    const auto fn = tmp.file("numeric.csv");
    std::ofstream(fn) << "channel,t_ps\n0,5\n1,9\n";
    const auto rn = read_tags_csv(fn);
    REQUIRE(rn.tags.size() == 2);
    CHECK(rn.tags[0].channel == Channel::A);
    CHECK(rn.tags[1].channel == Channel::B);

    const auto fb = tmp.file("badrow.csv");
    std::ofstream(fb) << "channel,t_ps\nA,12\nC,9\n";
    CHECK_THROWS_WITH(read_tags_csv(fb), Catch::Matchers::ContainsSubstring("invalid channel 'C'"));
}

TEST_CASE("binary and csv tag forms interconvert losslessly", "[io]") {
    TempDir tmp;
    const auto bin1 = tmp.file("a.phtag");
    const auto csv = tmp.file("a.csv");
    const auto bin2 = tmp.file("b.phtag");
    write_phtag(bin1, sample_stream());
    write_tags_csv(csv, read_phtag(bin1));
    write_phtag(bin2, read_tags_csv(csv));
    CHECK(slurp(bin1) == slurp(bin2));
}

TEST_CASE("histogram csv layout", "[io]") {
    TempDir tmp;
    CoincidenceHistogram h;
    h.bin_width_ps = 1000;
    h.window_ps = 2000;
    h.counts = {3, 0, 7, 1};
    const auto f = tmp.file("hist.csv");
    write_histogram_csv(f, h);
    std::ifstream in(f);
    std::string line;
    std::getline(in, line);
    CHECK(line == "tau_ps,counts");
    std::getline(in, line);
    CHECK(line == "-1500,3");
    std::getline(in, line);
    CHECK(line == "-500,0");
    std::getline(in, line);
    CHECK(line == "500,7");
    std::getline(in, line);
    CHECK(line == "1500,1");
}

TEST_CASE("g2 csv round trip", "[io]") {
    TempDir tmp;
    G2Curve c;
    c.bin_width_ps = 1000;
    c.tau_ps = {-1500.0, -500.0, 500.0, 1500.0};
    c.g2 = {1.0, 0.25, 0.1234567890123456, 1.75};
    c.sigma = {0.05, 0.04, 0.03, 0.125};
    const auto f = tmp.file("g2.csv");
    write_g2_csv(f, c);

    std::ifstream in(f);
    std::string header;
    std::getline(in, header);
    CHECK(header == "tau_ps,g2,sigma");

    const auto r = read_g2_csv(f);
    CHECK(r.tau_ps == c.tau_ps);
    CHECK(r.g2 == c.g2);  // %.17g survives exactly
    CHECK(r.sigma == c.sigma);
    CHECK(r.bin_width_ps == 1000);
}

TEST_CASE("spectrum csv round trip", "[io]") {
    TempDir tmp;
    Spectrum s;
    for (int i = 0; i < 32; ++i) {
        s.wavelength_nm.push_back(650.0 + 0.25 * i);
        s.intensity.push_back(1.0 / (1.0 + i));
    }
    const auto f = tmp.file("spec.csv");
    write_spectrum_csv(f, s);

    std::ifstream in(f);
    std::string header;
    std::getline(in, header);
    CHECK(header == "wavelength_nm,intensity");

    const auto r = read_spectrum_csv(f);
    CHECK(r.wavelength_nm == s.wavelength_nm);
    CHECK(r.intensity == s.intensity);
}

TEST_CASE("manifest kinds parse and round trip", "[io]") {
    TempDir tmp;

    Manifest g2m;
    g2m.kind = ManifestKind::g2_files;
    g2m.entries = {{100.0, "g2_100.csv", 0, 0}, {500.0, "g2_500.csv", 0, 0}};
    const auto f1 = tmp.file("sweep.csv");
    write_manifest(f1, g2m);
    const auto r1 = read_manifest(f1);
    CHECK(r1.kind == ManifestKind::g2_files);
    REQUIRE(r1.entries.size() == 2);
    CHECK(r1.entries[1].p_uW == 500.0);
    CHECK(r1.entries[1].g2_file == "g2_500.csv");

    Manifest satm;
    satm.kind = ManifestKind::saturation_points;
    satm.entries = {{100.0, "", 7.5e5, 866.0}, {800.0, "", 1.4e6, 1183.0}};
    const auto f2 = tmp.file("rates.csv");
    write_manifest(f2, satm);
    const auto r2 = read_manifest(f2);
    CHECK(r2.kind == ManifestKind::saturation_points);
    REQUIRE(r2.entries.size() == 2);
    CHECK(r2.entries[0].rate_cps == 7.5e5);
    CHECK(r2.entries[1].sigma_cps == 1183.0);

    const auto fb = tmp.file("bad.csv");
    std::ofstream(fb) << "P_uW,unexpected\n1,2\n";
    CHECK_THROWS_AS(read_manifest(fb), IoError);
}

TEST_CASE("report files are ordered key-value text", "[io]") {
    TempDir tmp;
    const Report rep = {{"tau2_ns", "13.600"}, {"classification", "two-level"}, {"note", "a=b"}};
    const auto f = tmp.file("report.txt");
    write_report(f, rep);

    std::ifstream in(f);
    std::string line;
    std::getline(in, line);
    CHECK(line == "tau2_ns=13.600");

    const auto r = read_report(f);
    REQUIRE(r.size() == 3);
    CHECK(r[0].first == "tau2_ns");
    CHECK(r[2].second == "a=b");  // value may itself hold '='

    const auto fc = tmp.file("commented.txt");
    std::ofstream(fc) << "# run summary\nkey=1\n\nother=2\n";
    const auto rc = read_report(fc);
    REQUIRE(rc.size() == 2);
    CHECK(rc[0].first == "key");
    CHECK(rc[1].second == "2");
}
