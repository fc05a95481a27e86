package bench;

import java.security.MessageDigest;

public class InsecureDigest {

    public byte[] checksum(byte[] data) throws Exception {
        MessageDigest md = MessageDigest.getInstance("MD5");
        md.update(data);
        return md.digest();
    }
}
