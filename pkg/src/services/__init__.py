"""Engine services: data, regularizers, training, evaluation and analysis"""
