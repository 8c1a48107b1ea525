/// Quintic transition of a scalar channel from `(x0, x0', x0'')` to a
/// constant target with zero first and second derivative at the end.
///
/// Past `duration` the channel holds the target exactly. A zero duration
/// means the channel is at the target from the start.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct QuinticBlend {
    coeffs: [f64; 6],
    duration: f64,
    target: f64,
    area: f64,
}

impl QuinticBlend {
    pub fn new(x0: f64, d0: f64, dd0: f64, target: f64, duration: f64) -> Self {
        if duration <= 0.0 {
            return Self {
                coeffs: [target, 0.0, 0.0, 0.0, 0.0, 0.0],
                duration: 0.0,
                target,
                area: 0.0,
            };
        }
        let d = duration;
        let rem0 = target - x0 - d0 * d - 0.5 * dd0 * d * d;
        let rem1 = -d0 - dd0 * d;
        let rem2 = -dd0;
        let c3 = (20.0 * rem0 - 8.0 * rem1 * d + rem2 * d * d) / (2.0 * d.powi(3));
        let c4 = (-30.0 * rem0 + 14.0 * rem1 * d - 2.0 * rem2 * d * d) / (2.0 * d.powi(4));
        let c5 = (12.0 * rem0 - 6.0 * rem1 * d + rem2 * d * d) / (2.0 * d.powi(5));
        let mut blend = Self {
            coeffs: [x0, d0, 0.5 * dd0, c3, c4, c5],
            duration: d,
            target,
            area: 0.0,
        };
        blend.area = blend.poly_integral(d);
        blend
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    /// Value and first three derivatives at `t`.
    pub fn derivatives(&self, t: f64) -> [f64; 4] {
        if t >= self.duration {
            return [self.target, 0.0, 0.0, 0.0];
        }
        let t = t.max(0.0);
        let c = &self.coeffs;
        let value = c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))));
        let d1 = c[1] + t * (2.0 * c[2] + t * (3.0 * c[3] + t * (4.0 * c[4] + t * 5.0 * c[5])));
        let d2 = 2.0 * c[2] + t * (6.0 * c[3] + t * (12.0 * c[4] + t * 20.0 * c[5]));
        let d3 = 6.0 * c[3] + t * (24.0 * c[4] + t * 60.0 * c[5]);
        [value, d1, d2, d3]
    }

    pub fn value(&self, t: f64) -> f64 {
        self.derivatives(t)[0]
    }

    /// Integral of the channel over `[0, t]`, extended linearly past the end.
    pub fn integral(&self, t: f64) -> f64 {
        if t >= self.duration {
            self.area + self.target * (t - self.duration)
        } else {
            self.poly_integral(t.max(0.0))
        }
    }

    fn poly_integral(&self, t: f64) -> f64 {
        let c = &self.coeffs;
        t * (c[0]
            + t * (c[1] / 2.0
                + t * (c[2] / 3.0 + t * (c[3] / 4.0 + t * (c[4] / 5.0 + t * c[5] / 6.0)))))
    }
}
