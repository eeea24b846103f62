(function(c, d) {
    var e = function(f) {
        while (--f) {
            c['push'] (c['shift']());
        }
    };
    e(++d);
} (a, 0xea));
