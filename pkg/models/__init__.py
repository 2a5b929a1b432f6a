from .Domain import Ball, BoxDomain, Grid, PlaneSegment
from .Section1D import Section1D, SliceMeasureValue
from .Field import Affine, AnalyticField, PlaneJump, Ramp, SampledField, Sum
from .DirectionRule import DirectionRule
from .BallFamily import BallFamily, BallStrategy
from .EnergyReport import EnergyReport
from .GriffithValue import Convention, GriffithValue
from .DirichletProblem import DirichletProblem
from .DescentTrace import DescentTrace, StopReason
