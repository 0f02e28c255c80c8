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

#ifndef TP_NETSIM_HPP_
#define TP_NETSIM_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace tp {

// Star network: device 0 is the server and also holds data. Transport is
// lossless and instantaneous; only transmitted volume is accounted.
struct Topology {
  int n = 1;
  int dim = 1;  // floats in one full operator
};

enum class EventKind {
  kCompressedUpload,
  kFullUpload,
  kBroadcast,
  kSyncBroadcast,
};

std::string to_string(EventKind kind);

struct CommEvent {
  std::int64_t round = 0;
  EventKind kind = EventKind::kBroadcast;
  int device = -1;  // -1 for broadcasts
  std::int64_t floats = 0;
};

struct LedgerReport {
  std::int64_t rounds = 0;
  std::int64_t full_syncs = 0;
  std::int64_t total_uplink = 0;
  double mean_uplink = 0.0;  // over non-server devices
  std::int64_t max_uplink = 0;
  // mean_uplink / dim: full operators sent by a typical device
  double uplink_full_operators = 0.0;
  std::int64_t broadcast_floats = 0;
};

class CommLedger {
 public:
  explicit CommLedger(Topology topology, bool keep_events = true);

  const Topology& topology() const { return topology_; }

  // Opens a communication round; every charge belongs to the latest round.
  void begin_round(bool full_sync = false);

  // Uplink from a device. The server's own data never crosses the network,
  // so device 0 is charged 0 whatever the argument.
  void charge_upload(int device, std::int64_t floats,
                     EventKind kind = EventKind::kFullUpload);
  void charge_broadcast(std::int64_t floats,
                        EventKind kind = EventKind::kBroadcast);

  std::int64_t rounds() const { return rounds_; }
  std::int64_t full_syncs() const { return full_syncs_; }
  std::int64_t uplink(int device) const { return uplink_.at(device); }
  const std::vector<std::int64_t>& uplink_per_device() const {
    return uplink_;
  }
  std::int64_t broadcast_floats() const { return broadcast_; }
  std::int64_t total_uplink() const;
  double mean_uplink() const;  // over non-server devices; 0 when n == 1
  const std::vector<CommEvent>& events() const { return events_; }
  bool keeps_events() const { return keep_events_; }

 private:
  Topology topology_;
  bool keep_events_;
  std::vector<std::int64_t> uplink_;
  std::int64_t broadcast_ = 0;
  std::int64_t rounds_ = 0;
  std::int64_t full_syncs_ = 0;
  std::vector<CommEvent> events_;
};

LedgerReport summarize(const CommLedger& ledger);

// Recomputes the report from the event log alone.
LedgerReport summarize_events(const std::vector<CommEvent>& events,
                              const Topology& topology);

// {"topology": {...}, "summary": {...}, "events": [...]}
void write_ledger_json(std::ostream& out, const CommLedger& ledger);

// One row per round: round,uplink_floats,broadcast_floats,full_sync
void write_ledger_csv(std::ostream& out, const CommLedger& ledger);

}  // namespace tp

#endif  // TP_NETSIM_HPP_
