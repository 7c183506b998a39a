#pragma once

#include <string>

#include "lobtrend/dataset.hpp"

namespace lobtrend {

// Parses a LOBSTER-style orderbook/message file pair with equal row counts.
// Orderbook rows carry 4*levels integer columns (ask_p, ask_v, bid_p, bid_v
// per level) with prices in ten-thousandths of a monetary unit; message rows
// are (time, type, order_id, size, price, direction) with direction +1 buy /
// -1 sell. Snapshot timestamps come from the aligned message rows. With
// `strict`, book invariant violations are fatal; otherwise they are recorded
// in the bundle diagnostics and the bundle is marked degraded.
DatasetBundle parse_snapshot_message_pair(const std::string& orderbook_file,
                                          const std::string& message_file,
                                          int levels, bool strict = false);

// Parses the FI-2010 matrix layout: 149 rows (40 raw LOB features, 104
// handcrafted features, 5 label rows for horizons {10,20,30,50,100} with
// values 1=U, 2=S, 3=D), one column per sample. Values are ingested raw.
DatasetBundle parse_fi2010_matrix(const std::string& file);

// Parses a generic pre-sampled snapshot CSV with a header naming a timestamp
// column plus ask_p_i/ask_v_i/bid_p_i/bid_v_i for each level. An optional
// `day` column carries session ids.
DatasetBundle parse_generic_snapshots(const std::string& file, int levels);

} // namespace lobtrend
