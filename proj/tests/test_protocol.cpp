#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "certdel/analysis.hpp"
#include "certdel/protocol.hpp"
#include "test_util.hpp"

using namespace certdel;

namespace {

ProtocolParams make_params(int d, int n, double delta, std::uint64_t seed,
                           double fraction = 0.5) {
  ProtocolParams params;
  params.dimension = d;
  params.n_rounds = n;
  params.message_fraction = fraction;
  params.delta = delta;
  params.seed = seed;
  return params;
}

std::vector<int> uniform_message(int count, int d, Rng& rng) {
  std::vector<int> message(static_cast<std::size_t>(count));
  for (int& s : message) {
    s = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(d)));
  }
  return message;
}

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(make_params(2, 0, 0.05, 1).validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_params(2, 100, 0.5, 1).validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_params(2, 100, -0.1, 1).validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_params(2, 100, 0.05, 1, 1.0).validate(), std::invalid_argument);
  CHECK_NOTHROW(make_params(4, 100, 0.7, 1).validate());  // < 1 - 1/4
  CHECK_THROWS_AS(make_params(4, 100, 0.75, 1).validate(), std::invalid_argument);
  CHECK(ProtocolParams::default_delta(2) == doctest::Approx(0.0550139322).epsilon(1e-7));
}

TEST_CASE("alice_prepare splits rounds and encodes exactly") {
  const ProtocolParams params = make_params(2, 4, 0.05, 42);
  Rng rng(params.seed);
  auto [record, states] = alice_prepare(params, {0, 1}, rng);
  CHECK(record.message_positions.size() == 2);
  CHECK(record.key_positions.size() == 2);
  CHECK(states.size() == 4);
  int comp_rounds = 0;
  for (BasisRole role : record.basis_choice) {
    comp_rounds += (role == BasisRole::Computational);
  }
  CHECK(comp_rounds == 2);
  // message symbols land in order at the message positions
  CHECK(record.symbols[static_cast<std::size_t>(record.message_positions[0])] == 0);
  CHECK(record.symbols[static_cast<std::size_t>(record.message_positions[1])] == 1);

  // every emitted state is exactly one basis element
  const BasisSet comp = computational_basis(2);
  const BasisSet had = hadamard_basis(2);
  for (int i = 0; i < 4; ++i) {
    const bool is_message = record.basis_choice[static_cast<std::size_t>(i)] ==
                            BasisRole::Computational;
    const BasisSet& basis = is_message ? comp : had;
    const int symbol = record.symbols[static_cast<std::size_t>(i)];
    CHECK(std::abs(std::abs(overlap(states[static_cast<std::size_t>(i)],
                                    basis.state(symbol))) -
                   1.0) < 1e-12);
  }
}

TEST_CASE("alice_prepare input validation") {
  const ProtocolParams params = make_params(2, 4, 0.05, 1);
  Rng rng(1);
  CHECK_THROWS_AS(alice_prepare(params, {0}, rng), std::invalid_argument);
  CHECK_THROWS_AS(alice_prepare(params, {0, 2}, rng), std::invalid_argument);
}

TEST_CASE("message positions are reproducible and uniform over subsets") {
  const ProtocolParams base = make_params(2, 6, 0.05, 7);
  {
    Rng a(base.seed), b(base.seed);
    auto [ra, sa] = alice_prepare(base, {0, 1, 0}, a);
    auto [rb, sb] = alice_prepare(base, {0, 1, 0}, b);
    CHECK(ra.message_positions == rb.message_positions);
    CHECK(ra.symbols == rb.symbols);
  }
  // chi-square over the C(6,3) = 20 subsets, 10^4 seeds
  std::map<std::vector<int>, long long> counts;
  const int seeds = 10000;
  for (int s = 0; s < seeds; ++s) {
    ProtocolParams params = base;
    params.seed = static_cast<std::uint64_t>(s);
    Rng rng(params.seed);
    auto [record, states] = alice_prepare(params, {0, 1, 0}, rng);
    ++counts[record.message_positions];
  }
  CHECK(counts.size() == 20);
  std::vector<long long> observed;
  for (const auto& [subset, count] : counts) observed.push_back(count);
  const std::vector<double> expected(20, seeds / 20.0);
  CHECK(test_util::chi_square_statistic(observed, expected) <
        test_util::chi2_crit_999(19));
}

TEST_CASE("honest delete against the identity channel") {
  const ProtocolParams params = make_params(2, 100000, 0.05, 99);
  Rng rng(params.seed);
  Rng msg_rng = rng.fork(100);
  const std::vector<int> message = uniform_message(params.message_count(), 2, msg_rng);
  Rng prep = rng.fork(0);
  auto [record, states] = alice_prepare(params, message, prep);
  Rng bob = rng.fork(1);
  const DeletionCertificate cert =
      bob_delete(states, ChannelModel::identity(2), bob);

  // key positions: certificate equals the key symbols exactly
  for (int pos : record.key_positions) {
    REQUIRE(cert.outcomes[static_cast<std::size_t>(pos)].has_value());
    CHECK(*cert.outcomes[static_cast<std::size_t>(pos)] ==
          record.symbols[static_cast<std::size_t>(pos)]);
  }
  // message positions: Hadamard outcomes carry nothing, uniform over [0, d)
  long long ones = 0;
  for (int pos : record.message_positions) {
    ones += *cert.outcomes[static_cast<std::size_t>(pos)];
  }
  const double n_msg = static_cast<double>(record.message_positions.size());
  const double sigma = test_util::binomial_sigma(0.5, n_msg);
  CHECK(std::abs(static_cast<double>(ones) / n_msg - 0.5) < 4.0 * sigma);

  const VerificationResult vr = alice_verify(record, cert, params.delta);
  CHECK(vr.accepted);
  CHECK(vr.observed_key_error_rate == 0.0);
  CHECK(vr.compared_rounds == static_cast<int>(record.key_positions.size()));
}

TEST_CASE("uniform channel noise surfaces as key error rate 1 - F") {
  const double fidelity = 0.9;
  const ProtocolParams params = make_params(4, 20000, 0.3, 5);
  Rng rng(params.seed);
  Rng msg_rng = rng.fork(100);
  const std::vector<int> message = uniform_message(params.message_count(), 4, msg_rng);
  Rng prep = rng.fork(0);
  auto [record, states] = alice_prepare(params, message, prep);
  Rng bob = rng.fork(1);
  const DeletionCertificate cert =
      bob_delete(states, ChannelModel::uniform_error(4, fidelity), bob);
  const VerificationResult vr = alice_verify(record, cert, params.delta);
  const double sigma = test_util::binomial_sigma(1.0 - fidelity, vr.compared_rounds);
  CHECK(std::abs(vr.observed_key_error_rate - (1.0 - fidelity)) < 4.0 * sigma);
}

TEST_CASE("verification of a guessing certificate") {
  const ProtocolParams params = make_params(2, 20000, 0.3, 13);
  Rng rng(params.seed);
  Rng msg_rng = rng.fork(100);
  const std::vector<int> message = uniform_message(params.message_count(), 2, msg_rng);
  Rng prep = rng.fork(0);
  auto [record, states] = alice_prepare(params, message, prep);
  DeletionCertificate guessed;
  Rng guess_rng = rng.fork(200);
  for (int i = 0; i < params.n_rounds; ++i) {
    guessed.outcomes.push_back(static_cast<int>(guess_rng.uniform_index(2)));
  }
  const VerificationResult vr = alice_verify(record, guessed, params.delta);
  const double sigma = test_util::binomial_sigma(0.5, vr.compared_rounds);
  CHECK(std::abs(vr.observed_key_error_rate - 0.5) < 4.0 * sigma);
  CHECK_FALSE(vr.accepted);
}

TEST_CASE("acceptance holds with delta at the zero-rate threshold") {
  // QBER 0.0096 against delta = 0.1100: the binomial tail above delta is
  // negligible, so every session verifies
  CHECK(test_util::binomial_tail_greater(5000, 0.0096, 0.1100 * 5000) < 1e-3);
  const ChannelModel channel = ChannelModel::uniform_error(2, 1.0 - 0.0096);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ProtocolParams params = make_params(2, 10000, 0.1100, seed);
    Rng msg_rng = Rng(seed).fork(100);
    const std::vector<int> message =
        uniform_message(params.message_count(), 2, msg_rng);
    const SessionReport report =
        run_session(params, message, channel, BobBehavior::Delete);
    REQUIRE(report.accepted.has_value());
    CHECK(*report.accepted);
  }
}

TEST_CASE("verification requires comparable rounds") {
  const ProtocolParams params = make_params(2, 50, 0.1, 3);
  Rng rng(params.seed);
  Rng msg_rng = rng.fork(100);
  const std::vector<int> message = uniform_message(params.message_count(), 2, msg_rng);
  Rng prep = rng.fork(0);
  auto [record, states] = alice_prepare(params, message, prep);
  DeletionCertificate all_lost;
  all_lost.outcomes.assign(static_cast<std::size_t>(params.n_rounds), std::nullopt);
  CHECK_THROWS_AS(alice_verify(record, all_lost, params.delta), std::runtime_error);
  DeletionCertificate short_cert;
  short_cert.outcomes.assign(10, 0);
  CHECK_THROWS_AS(alice_verify(record, short_cert, params.delta),
                  std::invalid_argument);
}

TEST_CASE("honest read recovers the message exactly over identity") {
  const ProtocolParams params = make_params(4, 2000, 0.05, 21);
  Rng rng(params.seed);
  Rng msg_rng = rng.fork(100);
  const std::vector<int> message = uniform_message(params.message_count(), 4, msg_rng);
  Rng prep = rng.fork(0);
  auto [record, states] = alice_prepare(params, message, prep);
  Rng bob = rng.fork(1);
  const SiftedMessage sifted =
      bob_read(states, record.basis_choice, ChannelModel::identity(4), bob);
  CHECK(sifted.symbols == message);
  CHECK(sifted_error_rate(sifted, record) == 0.0);
}

TEST_CASE("computational readout of key rounds is uniform") {
  // reveal every round as message to expose the key-round outcomes
  const int d = 4;
  const ProtocolParams params = make_params(d, 40000, 0.05, 23);
  Rng rng(params.seed);
  Rng msg_rng = rng.fork(100);
  const std::vector<int> message = uniform_message(params.message_count(), d, msg_rng);
  Rng prep = rng.fork(0);
  auto [record, states] = alice_prepare(params, message, prep);
  Rng bob = rng.fork(1);
  const std::vector<BasisRole> reveal_all(states.size(), BasisRole::Computational);
  const SiftedMessage everything =
      bob_read(states, reveal_all, ChannelModel::identity(d), bob);
  std::vector<long long> counts(static_cast<std::size_t>(d), 0);
  long long key_rounds = 0;
  for (std::size_t i = 0; i < everything.symbols.size(); ++i) {
    const std::size_t round = static_cast<std::size_t>(everything.rounds[i]);
    if (record.basis_choice[round] == BasisRole::Hadamard) {
      ++counts[static_cast<std::size_t>(everything.symbols[i])];
      ++key_rounds;
    }
  }
  const double sigma =
      test_util::binomial_sigma(1.0 / d, static_cast<double>(key_rounds));
  for (long long c : counts) {
    CHECK(std::abs(static_cast<double>(c) / static_cast<double>(key_rounds) -
                   1.0 / d) < 4.0 * sigma);
  }
}

TEST_CASE("message error rate tracks the channel QBER") {
  const double qber = 0.024;
  const ProtocolParams params = make_params(4, 100000, 0.05, 29);
  Rng msg_rng = Rng(params.seed).fork(100);
  const std::vector<int> message = uniform_message(params.message_count(), 4, msg_rng);
  const SessionReport report = run_session(
      params, message, ChannelModel::uniform_error(4, 1.0 - qber), BobBehavior::Read);
  REQUIRE(report.qber_message.has_value());
  const double sigma = test_util::binomial_sigma(qber, report.sifted_count);
  CHECK(std::abs(*report.qber_message - qber) < 4.0 * sigma);
}

TEST_CASE("lost rounds shrink the comparison but not the error rate") {
  ProtocolParams params = make_params(2, 20000, 0.05, 31);
  Rng msg_rng = Rng(params.seed).fork(100);
  const std::vector<int> message = uniform_message(params.message_count(), 2, msg_rng);
  const SessionReport clean =
      run_session(params, message, ChannelModel::identity(2), BobBehavior::Delete);
  const SessionReport lossy =
      run_session(params, message, ChannelModel::loss(2, 0.6), BobBehavior::Delete);
  CHECK(*clean.accepted);
  CHECK(*lossy.accepted);
  CHECK(*clean.qber_key == 0.0);
  CHECK(*lossy.qber_key == 0.0);
  const double expected = 0.6 * clean.compared_rounds;
  const double sigma = std::sqrt(0.6 * 0.4 * clean.compared_rounds);
  CHECK(std::abs(lossy.compared_rounds - expected) < 4.0 * sigma);
}

TEST_CASE("acceptance is monotone in channel fidelity under coupled seeds") {
  // per-round substreams couple the noise draws across fidelity values:
  // the error set can only grow as F drops, so per-session acceptance is
  // pathwise monotone and the counts compare exactly
  const std::vector<double> fidelities = {0.99, 0.95, 0.90, 0.80};
  std::vector<int> accepted_counts;
  for (double fidelity : fidelities) {
    int accepted = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      ProtocolParams params = make_params(2, 200, 0.10, seed);
      Rng msg_rng = Rng(seed).fork(100);
      const std::vector<int> message =
          uniform_message(params.message_count(), 2, msg_rng);
      const SessionReport report =
          run_session(params, message, ChannelModel::uniform_error(2, fidelity),
                      BobBehavior::Delete);
      accepted += *report.accepted;
    }
    accepted_counts.push_back(accepted);
  }
  for (std::size_t i = 0; i + 1 < accepted_counts.size(); ++i) {
    CHECK(accepted_counts[i] >= accepted_counts[i + 1]);
  }
  CHECK(accepted_counts.front() > accepted_counts.back());

  // and monotone the other way in delta, on the same sessions
  const std::vector<double> deltas = {0.02, 0.1, 0.3};
  std::vector<int> by_delta;
  for (double delta : deltas) {
    int accepted = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      ProtocolParams params = make_params(2, 200, delta, seed);
      Rng msg_rng = Rng(seed).fork(100);
      const std::vector<int> message =
          uniform_message(params.message_count(), 2, msg_rng);
      const SessionReport report = run_session(
          params, message, ChannelModel::uniform_error(2, 0.9), BobBehavior::Delete);
      accepted += *report.accepted;
    }
    by_delta.push_back(accepted);
  }
  CHECK(by_delta[0] <= by_delta[1]);
  CHECK(by_delta[1] <= by_delta[2]);
}

TEST_CASE("sessions are bit-identical for identical inputs") {
  ProtocolParams params = make_params(4, 500, 0.09, 1234);
  Rng msg_rng = Rng(params.seed).fork(100);
  const std::vector<int> message = uniform_message(params.message_count(), 4, msg_rng);
  const ChannelModel channel = ChannelModel::uniform_error(4, 0.95);
  for (BobBehavior behavior : {BobBehavior::Delete, BobBehavior::Read}) {
    const SessionReport a = run_session(params, message, channel, behavior);
    const SessionReport b = run_session(params, message, channel, behavior);
    CHECK(session_report_to_json(a).dump() == session_report_to_json(b).dump());
  }
}

TEST_CASE("session reports carry the contract fields") {
  ProtocolParams params = make_params(2, 100, 0.05, 7);
  Rng msg_rng = Rng(params.seed).fork(100);
  const std::vector<int> message = uniform_message(params.message_count(), 2, msg_rng);
  const SessionReport del =
      run_session(params, message, ChannelModel::identity(2), BobBehavior::Delete);
  const nlohmann::json jd = session_report_to_json(del);
  for (const char* key : {"d", "n_rounds", "behavior", "qber_message", "qber_key",
                          "accepted", "key_rate_bits", "seed"}) {
    CHECK(jd.contains(key));
  }
  CHECK(jd.at("behavior") == "delete");
  CHECK(jd.at("seed").is_string());
  CHECK(jd.at("qber_message").is_null());
  CHECK(jd.at("accepted") == true);
  CHECK(jd.at("key_rate_bits").is_null());

  const SessionReport read =
      run_session(params, message, ChannelModel::identity(2), BobBehavior::Read);
  const nlohmann::json jr = session_report_to_json(read);
  CHECK(jr.at("behavior") == "read");
  CHECK(jr.at("qber_message") == 0.0);
  CHECK(jr.at("qber_key").is_null());
  CHECK(jr.at("accepted").is_null());
  CHECK(jr.at("key_rate_bits") == doctest::Approx(1.0));
}

TEST_CASE("identity read session reaches the full key rate") {
  ProtocolParams params = make_params(8, 4000, 0.1, 77);
  Rng msg_rng = Rng(params.seed).fork(100);
  const std::vector<int> message = uniform_message(params.message_count(), 8, msg_rng);
  const SessionReport report =
      run_session(params, message, ChannelModel::identity(8), BobBehavior::Read);
  CHECK(*report.qber_message == 0.0);
  CHECK(*report.key_rate_bits == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("read sessions at the reference QBERs reach the reference rates") {
  struct Point { int d; double qber; double rate; };
  for (const Point& point : {Point{2, 0.0096, 0.84}, Point{4, 0.024, 1.60},
                             Point{8, 0.072, 1.85}}) {
    ProtocolParams params = make_params(point.d, 100000, 0.1, 4206);
    Rng msg_rng = Rng(params.seed).fork(100);
    const std::vector<int> message =
        uniform_message(params.message_count(), point.d, msg_rng);
    const SessionReport report =
        run_session(params, message, ChannelModel::uniform_error(point.d, 1.0 - point.qber),
                    BobBehavior::Read);
    REQUIRE(report.key_rate_bits.has_value());
    CHECK(std::abs(*report.key_rate_bits - point.rate) < 0.01);
  }
}

TEST_CASE("toeplitz hashing") {
  SUBCASE("empty output") {
    CHECK(privacy_amplify({1, 0, 1}, 2, 0, 55).empty());
  }
  SUBCASE("1x1 all-ones diagonal") {
    ToeplitzHash unit;
    unit.in_bits = 1;
    unit.out_bits = 1;
    unit.diagonals = {1};
    CHECK(toeplitz_apply(unit, {1}) == std::vector<std::uint8_t>{1});
    CHECK(toeplitz_apply(unit, {0}) == std::vector<std::uint8_t>{0});
  }
  SUBCASE("little-endian symbol packing") {
    CHECK(symbols_to_bits({2}, 4) == std::vector<std::uint8_t>{0, 1});
    CHECK(symbols_to_bits({1, 3}, 4) == std::vector<std::uint8_t>{1, 0, 1, 1});
    CHECK(symbols_to_bits({5}, 8) == std::vector<std::uint8_t>{1, 0, 1});
    CHECK_THROWS_AS(symbols_to_bits({0}, 3), std::invalid_argument);
    CHECK_THROWS_AS(symbols_to_bits({4}, 4), std::invalid_argument);
  }
  SUBCASE("matches a dense GF(2) matrix multiply") {
    Rng rng(2718);
    const int d = 4;
    std::vector<int> symbols(64);
    for (int& s : symbols) {
      s = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(d)));
    }
    const std::size_t out_bits = 32;
    const std::uint64_t hash_seed = 909;
    const std::vector<std::uint8_t> bits = symbols_to_bits(symbols, d);
    const ToeplitzHash hash = toeplitz_from_seed(bits.size(), out_bits, hash_seed);
    // dense oracle: materialize T and row-dot the input
    std::vector<std::uint8_t> expected(out_bits, 0);
    for (std::size_t i = 0; i < out_bits; ++i) {
      int acc = 0;
      for (std::size_t j = 0; j < bits.size(); ++j) {
        const std::uint8_t t_ij = hash.diagonals[i + bits.size() - 1 - j];
        acc += t_ij * bits[j];
      }
      expected[i] = static_cast<std::uint8_t>(acc % 2);
    }
    CHECK(privacy_amplify(symbols, d, out_bits, hash_seed) == expected);
  }
  SUBCASE("oversized requests are rejected") {
    CHECK_THROWS_AS(privacy_amplify({1, 0}, 2, 3, 1), std::invalid_argument);
    CHECK_THROWS_AS(privacy_amplify({1, 0}, 3, 1, 1), std::invalid_argument);
  }
  SUBCASE("seeded hashes are reproducible") {
    const ToeplitzHash a = toeplitz_from_seed(100, 40, 11);
    const ToeplitzHash b = toeplitz_from_seed(100, 40, 11);
    const ToeplitzHash c = toeplitz_from_seed(100, 40, 12);
    CHECK(a.diagonals == b.diagonals);
    CHECK(a.diagonals != c.diagonals);
    CHECK(a.diagonals.size() == 139);
  }
}
