#pragma once

#include "hrag/bm25.hpp"
#include "hrag/config.hpp"
#include "hrag/embed.hpp"
#include "hrag/error.hpp"
#include "hrag/eval.hpp"
#include "hrag/hnsw.hpp"
#include "hrag/index_store.hpp"
#include "hrag/ingest.hpp"
#include "hrag/llm.hpp"
#include "hrag/orchestrate.hpp"
#include "hrag/rerank.hpp"
#include "hrag/retrieve.hpp"
#include "hrag/service.hpp"
#include "hrag/session_store.hpp"
#include "hrag/synthetic.hpp"
#include "hrag/text.hpp"
