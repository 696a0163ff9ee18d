#ifndef XCOM_XCOM_HPP_
#define XCOM_XCOM_HPP_

#include "xcom/classifier.hpp"
#include "xcom/config.hpp"
#include "xcom/corpus.hpp"
#include "xcom/encoder.hpp"
#include "xcom/error.hpp"
#include "xcom/explain.hpp"
#include "xcom/fusion.hpp"
#include "xcom/gbt.hpp"
#include "xcom/harness.hpp"
#include "xcom/lexicon.hpp"
#include "xcom/metrics.hpp"
#include "xcom/pipeline.hpp"
#include "xcom/preprocess.hpp"
#include "xcom/rng.hpp"
#include "xcom/scoring.hpp"
#include "xcom/semantic.hpp"
#include "xcom/shapley.hpp"
#include "xcom/text.hpp"
#include "xcom/tfidf.hpp"
#include "xcom/types.hpp"
#include "xcom/vocab.hpp"

#endif  // XCOM_XCOM_HPP_
