#ifndef QAM_QAM_HPP
#define QAM_QAM_HPP

#include "qam/types.hpp"
#include "qam/fft.hpp"
#include "qam/signal_forward.hpp"
#include "qam/hankel.hpp"
#include "qam/spectrum_prep.hpp"
#include "qam/hankel_admm.hpp"
#include "qam/estimators.hpp"
#include "qam/acoustics.hpp"
#include "qam/crb.hpp"
#include "qam/harness.hpp"
#include "qam/scan_io.hpp"

#endif // QAM_QAM_HPP
