// Copyright 2026 The threepillars Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tp/netsim.hpp"

#include <algorithm>
#include <map>
#include <ostream>

#include <nlohmann/json.hpp>

#include "tp/errors.hpp"

namespace tp {

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kCompressedUpload:
      return "compressed-upload";
    case EventKind::kFullUpload:
      return "full-upload";
    case EventKind::kBroadcast:
      return "broadcast";
    case EventKind::kSyncBroadcast:
      return "sync-broadcast";
  }
  return "unknown";
}

CommLedger::CommLedger(Topology topology, bool keep_events)
    : topology_(topology), keep_events_(keep_events) {
  if (topology.n < 1 || topology.dim < 1) {
    throw ValidationError("topology needs n >= 1 and dim >= 1");
  }
  uplink_.assign(topology.n, 0);
}

void CommLedger::begin_round(bool full_sync) {
  ++rounds_;
  if (full_sync) ++full_syncs_;
}

void CommLedger::charge_upload(int device, std::int64_t floats,
                               EventKind kind) {
  if (device < 0 || device >= topology_.n) {
    throw ValidationError("upload from unknown device " +
                          std::to_string(device));
  }
  if (floats < 0) throw ValidationError("negative upload size");
  const std::int64_t charged = device == 0 ? 0 : floats;
  uplink_[device] += charged;
  if (keep_events_) events_.push_back({rounds_, kind, device, charged});
}

void CommLedger::charge_broadcast(std::int64_t floats, EventKind kind) {
  if (floats < 0) throw ValidationError("negative broadcast size");
  broadcast_ += floats;
  if (keep_events_) events_.push_back({rounds_, kind, -1, floats});
}

std::int64_t CommLedger::total_uplink() const {
  std::int64_t total = 0;
  for (auto u : uplink_) total += u;
  return total;
}

double CommLedger::mean_uplink() const {
  if (topology_.n < 2) return 0.0;
  return static_cast<double>(total_uplink() - uplink_[0]) /
         static_cast<double>(topology_.n - 1);
}

namespace {

LedgerReport report_from(const std::vector<std::int64_t>& uplink,
                         std::int64_t broadcast, std::int64_t rounds,
                         std::int64_t syncs, const Topology& topo) {
  LedgerReport r;
  r.rounds = rounds;
  r.full_syncs = syncs;
  r.broadcast_floats = broadcast;
  for (auto u : uplink) {
    r.total_uplink += u;
    r.max_uplink = std::max(r.max_uplink, u);
  }
  if (topo.n > 1) {
    r.mean_uplink = static_cast<double>(r.total_uplink - uplink[0]) /
                    static_cast<double>(topo.n - 1);
  }
  r.uplink_full_operators = r.mean_uplink / static_cast<double>(topo.dim);
  return r;
}

}  // namespace

LedgerReport summarize(const CommLedger& ledger) {
  return report_from(ledger.uplink_per_device(), ledger.broadcast_floats(),
                     ledger.rounds(), ledger.full_syncs(), ledger.topology());
}

LedgerReport summarize_events(const std::vector<CommEvent>& events,
                              const Topology& topology) {
  std::vector<std::int64_t> uplink(topology.n, 0);
  std::int64_t broadcast = 0;
  std::int64_t rounds = 0;
  // A round is a full sync when it carries a sync broadcast.
  std::map<std::int64_t, bool> round_sync;
  for (const auto& e : events) {
    rounds = std::max(rounds, e.round);
    if (e.device >= 0) {
      uplink.at(e.device) += e.floats;
    } else {
      broadcast += e.floats;
    }
    round_sync[e.round] =
        round_sync[e.round] || e.kind == EventKind::kSyncBroadcast;
  }
  std::int64_t syncs = 0;
  for (const auto& [round, sync] : round_sync) syncs += sync ? 1 : 0;
  return report_from(uplink, broadcast, rounds, syncs, topology);
}

void write_ledger_json(std::ostream& out, const CommLedger& ledger) {
  const LedgerReport r = summarize(ledger);
  nlohmann::ordered_json j;
  j["topology"] = {{"n", ledger.topology().n}, {"dim", ledger.topology().dim}};
  j["summary"] = {{"rounds", r.rounds},
                  {"full_syncs", r.full_syncs},
                  {"total_uplink", r.total_uplink},
                  {"mean_uplink", r.mean_uplink},
                  {"max_uplink", r.max_uplink},
                  {"uplink_full_operators", r.uplink_full_operators},
                  {"broadcast_floats", r.broadcast_floats}};
  j["uplink_per_device"] = ledger.uplink_per_device();
  auto events = nlohmann::ordered_json::array();
  for (const auto& e : ledger.events()) {
    events.push_back({{"round", e.round},
                      {"kind", to_string(e.kind)},
                      {"device", e.device},
                      {"floats", e.floats}});
  }
  j["events"] = std::move(events);
  out << j.dump(1) << '\n';
}

void write_ledger_csv(std::ostream& out, const CommLedger& ledger) {
  out << "round,uplink_floats,broadcast_floats,full_sync\n";
  const auto& events = ledger.events();
  std::size_t k = 0;
  while (k < events.size()) {
    const std::int64_t round = events[k].round;
    std::int64_t up = 0;
    std::int64_t down = 0;
    bool sync = false;
    for (; k < events.size() && events[k].round == round; ++k) {
      (events[k].device >= 0 ? up : down) += events[k].floats;
      sync = sync || events[k].kind == EventKind::kSyncBroadcast;
    }
    out << round << ',' << up << ',' << down << ',' << (sync ? 1 : 0) << '\n';
  }
}

}  // namespace tp
